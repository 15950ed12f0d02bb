"""Command line entry point: generate, discover, experiment, oracle.

Exit status is 0 on success, 2 on a configuration error and 1 on any other
failure.  Every subcommand accepts ``--config FILE`` holding ``key = value``
lines; flags given on the command line override values from the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

from .grid import ConfigurationError, save_field
from .harness import (ExperimentConfig, brute_force_oracle, emit_reports, load_config_file,
                      resolve_problem, run_experiment, sidecar_path)
from .representation import canonical_form
from .synthetic import CASES, make_case

log = logging.getLogger("pdediscover")

# flag destination -> ExperimentConfig field
_FLAG_FIELDS = {
    "case": "case", "data": "data", "mode": "mode", "runs": "runs", "base_seed": "base_seed",
    "seed": "base_seed", "lam": "lam", "pop": "population", "iters": "iterations",
    "pool": "pool", "max_factors": "max_factors", "max_terms": "max_terms",
    "derivatives": "derivatives", "nt": "nt", "nx": "nx", "out": "out_dir",
    "workers": "workers", "multi_scalar": "multi_scalar",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--lambda", dest="lam", type=float, help="L1 weight of the term filter")
    p.add_argument("--pool", help="comma separated tokens, e.g. u,u_t,u_x,u_xx,sin(t)")
    p.add_argument("--max-factors", type=int)
    p.add_argument("--max-terms", type=int)


def _search(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pop", type=int, help="population size")
    p.add_argument("--iters", type=int, help="iterations (default 64 single, 8 multi)")
    p.add_argument("--derivatives", choices=("analytic", "numeric"))
    p.add_argument("--nt", type=int)
    p.add_argument("--nx", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--multi-scalar", choices=("archive-min", "balanced"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdediscover", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a benchmark field CSV and its metadata")
    g.add_argument("--case", required=True, choices=CASES)
    g.add_argument("--nt", type=int)
    g.add_argument("--nx", type=int)
    g.add_argument("--out", required=True, help="output directory")

    d = sub.add_parser("discover", help="one seeded search on a field")
    src = d.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="field CSV")
    src.add_argument("--case", choices=CASES)
    d.add_argument("--mode", choices=("single", "multi"))
    d.add_argument("--seed", type=int)
    d.add_argument("--out", help="optional directory for the trace")
    _common(d)
    _search(d)

    e = sub.add_parser("experiment", help="repeated seeded runs with statistics")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--case", choices=CASES)
    src.add_argument("--data")
    e.add_argument("--mode", choices=("single", "multi", "both"))
    e.add_argument("--runs", type=int)
    e.add_argument("--base-seed", type=int)
    e.add_argument("--out", help="report directory")
    _common(e)
    _search(e)

    o = sub.add_parser("oracle", help="exhaustive search over a small pool")
    src = o.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--case", choices=CASES)
    o.add_argument("--derivatives", choices=("analytic", "numeric"))
    o.add_argument("--budget", type=int, default=1_000_000)
    _common(o)
    return parser


def _settings(args, **defaults) -> dict:
    """Defaults, then the config file, then explicit flags."""
    out = dict(defaults)
    if getattr(args, "config", None):
        out.update(load_config_file(args.config))
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[name] = value
    if out.get("case") is not None and getattr(args, "data", None) is not None:
        out.pop("case")
    if out.get("data") is not None and getattr(args, "case", None) is not None:
        out.pop("data")
    known = {f.name for f in fields(ExperimentConfig)}
    return {k: v for k, v in out.items() if k in known or k == "mode"}


def _config(settings: dict) -> ExperimentConfig:
    return ExperimentConfig(**settings)


def cmd_generate(args) -> int:
    case = make_case(args.case, args.nt, args.nx)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{case.name}.csv"
    save_field(case.field, csv_path)
    nt, nx = case.grid.shape
    meta = {
        "case": case.name,
        "true_equation": case.true_equation,
        "token_pool": case.token_pool.describe(),
        "max_factors": case.token_pool.max_factors,
        "max_terms": case.token_pool.max_terms,
        "derivative_method": case.derivative_method,
        "nt": nt, "nx": nx,
    }
    sidecar_path(csv_path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(csv_path)
    return 0


def cmd_discover(args) -> int:
    settings = _settings(args, mode="single", runs=1)
    config = _config(settings)
    stats = run_experiment(config, emit=False)
    r = stats.records[0]
    print(f"equation    {r.canonical}")
    print(f"q_op        {r.q_op:.6g}")
    print(f"complexity  {r.complexity}")
    print(f"evaluations {r.evaluations}")
    if r.recovered is not None:
        print(f"recovered   {'yes' if r.recovered else 'no'}")
    return 0


def cmd_experiment(args) -> int:
    settings = _settings(args, mode="single", out_dir="results")
    if settings.get("case") is None and settings.get("data") is None:
        raise ConfigurationError("experiment needs --case or --data (flag or config file)")
    modes = ["single", "multi"] if settings["mode"] == "both" else [settings["mode"]]
    base = _config({**settings, "mode": modes[0]})
    problem = None if base.workers > 1 else resolve_problem(base)
    all_stats = []
    for mode in modes:
        config = replace(base, mode=mode, iterations=settings.get("iterations"))
        log.info("running %d %s runs", config.runs, mode)
        all_stats.append(run_experiment(config, emit=False, problem=problem))
    paths = emit_reports(all_stats, base.out_dir)
    for s in all_stats:
        rate = "" if s.recovery_rate is None else f"  recovered {s.recovery_rate:.0%}"
        print(f"{s.mode:6s}  mu {s.mean:.6g}  sigma2 {s.variance:.6g}{rate}")
    for p in paths:
        print(p)
    return 0


def cmd_oracle(args) -> int:
    settings = _settings(args, mode="single", runs=1)
    settings.setdefault("max_terms", 3)
    config = _config(settings)
    problem = resolve_problem(config)
    result = brute_force_oracle(problem.table, problem.pool, config.lam, args.budget)
    text, _ = canonical_form(result.best.equation)
    print(f"equation    {text}")
    print(f"q_op        {result.best.q_op:.6g}")
    print(f"complexity  {result.best.complexity}")
    print(f"enumerated  {result.count} equations over {result.terms} terms")
    return 0


COMMANDS = {"generate": cmd_generate, "discover": cmd_discover,
            "experiment": cmd_experiment, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort reporting for the CLI
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
