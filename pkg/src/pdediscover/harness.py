"""Seeded experiment orchestration, the brute-force oracle and report files."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .derivatives import DerivativeTable, build_table
from .grid import ConfigurationError, load_field
from .operators import OperatorConfig
from .optimizers import (Evaluator, Individual, MoeaddConfig, RunResult, SingleConfig,
                         pbi, run_moeadd, run_single_objective, trace_csv)
from .regression import DEFAULT_LAMBDA
from .representation import (Equation, TokenPool, canonical_form, enumerate_terms,
                             parse_pool)
from .synthetic import CASES, make_case

MODES = ("single", "multi")
DEFAULT_ITERATIONS = {"single": 64, "multi": 8}
ORACLE_BUDGET = 1_000_000
RECOVERY_DIGITS = 2
SCALAR_READINGS = ("archive-min", "balanced")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a batch of seeded runs.

    Exactly one of ``case`` and ``data`` names the input.  ``iterations`` of
    ``None`` means the mode default (64 single, 8 multi); ``pool`` of ``None``
    means the benchmark pool, or ``DEFAULT_DATA_POOL`` for a data file.
    """

    case: str | None = None
    data: str | None = None
    mode: str = "single"
    runs: int = 10
    base_seed: int = 0
    seeds: tuple = ()
    population: int = 8
    iterations: int | None = None
    lam: float = DEFAULT_LAMBDA
    crossover_rate: float = 0.3
    mutation_rate: float = 0.6
    param_sigma: float = 0.1
    pool: str | None = None
    max_factors: int = 2
    max_terms: int = 5
    derivatives: str | None = None
    nt: int | None = None
    nx: int | None = None
    multi_scalar: str = "archive-min"
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        if (self.case is None) == (self.data is None):
            raise ConfigurationError("give exactly one of case and data")
        if self.case is not None and self.case not in CASES:
            raise ConfigurationError(f"unknown case {self.case!r}; choose from {', '.join(CASES)}")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.runs < 1:
            raise ConfigurationError("runs must be at least 1")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.seeds and len(self.seeds) != self.runs:
            raise ConfigurationError(f"{len(self.seeds)} seeds given for {self.runs} runs")
        if self.derivatives not in (None, "analytic", "numeric"):
            raise ConfigurationError("derivatives must be analytic or numeric")
        if self.multi_scalar not in SCALAR_READINGS:
            raise ConfigurationError(f"multi_scalar must be one of {SCALAR_READINGS}")
        if self.workers < 1:
            raise ConfigurationError("workers must be positive")
        self.operators()
        self.optimizer_config()

    @property
    def run_seeds(self) -> tuple:
        return self.seeds or tuple(self.base_seed + i for i in range(self.runs))

    @property
    def effective_iterations(self) -> int:
        return DEFAULT_ITERATIONS[self.mode] if self.iterations is None else self.iterations

    def operators(self) -> OperatorConfig:
        return OperatorConfig(self.crossover_rate, self.mutation_rate, self.param_sigma)

    def optimizer_config(self):
        if self.mode == "single":
            return SingleConfig(self.population, self.effective_iterations, self.operators(),
                                self.lam)
        return MoeaddConfig(self.population, self.effective_iterations,
                            operators=self.operators(), lam=self.lam,
                            neighbors=min(4, self.population))

    def echo(self) -> dict:
        out = asdict(self)
        out["seeds"] = list(self.run_seeds)
        out["iterations"] = self.effective_iterations
        return out


DEFAULT_DATA_POOL = "u,u_t,u_x,u_xx"


# -- key=value configuration ---------------------------------------------------

def _convert(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigurationError(f"unknown config key {name!r}")
    kind = kinds[name]
    raw = raw.strip()
    if raw.lower() in ("", "none") and "None" in kind:
        return None
    try:
        if name == "seeds":
            return tuple(int(s) for s in raw.replace(",", " ").split())
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigurationError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines; ``#`` starts a comment; ``lambda`` aliases ``lam``."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = {"lambda": "lam", "pop": "population", "iters": "iterations"}.get(key, key)
        key = key.replace("-", "_")
        out[key] = _convert(key, value)
    return out


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


# -- data resolution -----------------------------------------------------------

@dataclass
class Problem:
    table: DerivativeTable
    pool: TokenPool
    true_equation: str | None


def sidecar_path(data_path) -> Path:
    return Path(data_path).with_suffix(".json")


def resolve_problem(config: ExperimentConfig) -> Problem:
    if config.case is not None:
        case = make_case(config.case, config.nt, config.nx)
        if config.pool is None:
            pool = replace(case.token_pool, max_factors=config.max_factors,
                           max_terms=config.max_terms)
        else:
            pool = parse_pool(config.pool, config.max_factors, config.max_terms)
        table = case.table(config.derivatives, pool.specs)
        return Problem(table, pool, case.true_equation)
    if config.derivatives == "analytic":
        raise ConfigurationError("analytic derivatives need a benchmark case, not a data file")
    path = Path(config.data)
    if not path.is_file():
        raise ConfigurationError(f"data file not found: {path}")
    meta = {}
    if sidecar_path(path).is_file():
        meta = json.loads(sidecar_path(path).read_text())
    pool = parse_pool(config.pool or meta.get("token_pool", DEFAULT_DATA_POOL),
                      config.max_factors, config.max_terms)
    table = build_table(load_field(path), pool.specs)
    return Problem(table, pool, meta.get("true_equation"))


# -- runs and statistics -------------------------------------------------------

def per_run_scalar(result: RunResult, reading: str = "archive-min") -> Individual:
    """The individual whose q_op stands for one run.

    ``archive-min`` takes the lowest discrepancy in the archive.  ``balanced``
    takes the archive member with the smallest PBI against the equal-weight
    direction after normalizing both objectives over the archive.
    """
    members = list(result.archive)
    if not members:
        return result.best
    if reading == "archive-min":
        return result.archive.best()
    if reading != "balanced":
        raise ConfigurationError(f"unknown reading {reading!r}")
    V = np.array([m.objectives.vector() for m in members])
    lo = V.min(axis=0)
    span = np.maximum(V.max(axis=0) - lo, 1e-300)
    scores = [pbi((v - lo) / span, (0.5, 0.5), (0.0, 0.0)) for v in V]
    return members[int(np.argmin(scores))]


@dataclass
class RunRecord:
    seed: int
    q_op: float
    complexity: int
    canonical: str
    recovered: bool | None
    evaluations: int
    seconds: float = 0.0
    trace: str = ""
    coefficients: tuple = ()
    archive: tuple = ()


@dataclass
class RunStats:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    true_equation: str | None = None

    @property
    def mode(self) -> str:
        return self.config.mode

    @property
    def values(self) -> list[float]:
        return [r.q_op for r in self.records]

    @property
    def mean(self) -> float:
        return statistics.fmean(self.values)

    @property
    def variance(self) -> float:
        """Sample (n-1) variance; 0 for a single run."""
        v = self.values
        return statistics.variance(v) if len(v) > 1 else 0.0

    @property
    def recovery_rate(self) -> float | None:
        if self.true_equation is None:
            return None
        return sum(bool(r.recovered) for r in self.records) / len(self.records)


def _optimize(problem: Problem, config: ExperimentConfig, seed: int) -> RunRecord:
    start = time.perf_counter()
    if config.mode == "single":
        result = run_single_objective(problem.table, problem.pool, config.optimizer_config(), seed)
        chosen = result.best
    else:
        result = run_moeadd(problem.table, problem.pool, config.optimizer_config(), seed)
        chosen = per_run_scalar(result, config.multi_scalar)
    seconds = time.perf_counter() - start
    rounded = canonical_form(chosen.equation, RECOVERY_DIGITS)[0]
    text, coefs = canonical_form(chosen.equation)
    recovered = None if problem.true_equation is None else rounded == problem.true_equation
    archive = tuple((i.objectives.vector(), i.canonical) for i in result.archive)
    return RunRecord(seed, chosen.q_op, chosen.complexity, text, recovered, result.evaluations,
                     seconds, trace_csv(result.trace), tuple(float(c) for c in coefs), archive)


def _worker(config: ExperimentConfig, seed: int) -> RunRecord:
    return _optimize(resolve_problem(config), config, seed)


def run_experiment(config: ExperimentConfig, emit: bool = True,
                   problem: Problem | None = None) -> RunStats:
    """Run ``config.runs`` seeded optimizations and collect their statistics.

    With an output directory, per-run traces are written under ``traces/``
    and, when ``emit`` is set, the report files next to them.
    """
    seeds = config.run_seeds
    if config.workers > 1 and problem is None:
        resolve_problem(config)
        with ProcessPoolExecutor(config.workers) as ex:
            records = list(ex.map(_worker, [config] * len(seeds), seeds))
        true_eq = resolve_problem(config).true_equation
    else:
        problem = problem or resolve_problem(config)
        records = [_optimize(problem, config, s) for s in seeds]
        true_eq = problem.true_equation
    stats = RunStats(config, records, true_eq)
    if config.out_dir is not None:
        write_traces(stats, config.out_dir)
        if emit:
            emit_reports(stats, config.out_dir)
    return stats


# -- reports -------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def write_traces(stats: RunStats, out_dir) -> None:
    for i, r in enumerate(stats.records):
        _write(Path(out_dir) / "traces" / f"{stats.mode}_run{i:02d}_seed{r.seed}.csv", r.trace)


RUNS_HEADER = ("mode", "run", "seed", "best_q_op", "complexity", "recovered", "evaluations",
               "canonical")


def runs_csv(all_stats) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUNS_HEADER)
    for s in all_stats:
        for i, r in enumerate(s.records):
            rec = "" if r.recovered is None else int(r.recovered)
            w.writerow([s.mode, i, r.seed, _fmt(r.q_op), r.complexity, rec, r.evaluations,
                        r.canonical])
    return buf.getvalue()


def boxplot_csv(all_stats) -> str:
    """One column of per-run q_op values per mode, ready for a box plot."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([s.mode for s in all_stats])
    for row in itertools.zip_longest(*[s.values for s in all_stats], fillvalue=None):
        w.writerow(["" if v is None else _fmt(v) for v in row])
    return buf.getvalue()


def stats_json(all_stats) -> str:
    doc = {}
    for s in all_stats:
        doc[s.mode] = {
            "config": s.config.echo(),
            "runs": len(s.records),
            "mu": s.mean,
            "sigma2": s.variance,
            "recovery_rate": s.recovery_rate,
            "true_equation": s.true_equation,
            "evaluations": sum(r.evaluations for r in s.records),
            "values": s.values,
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit_reports(stats, out_dir) -> list[Path]:
    """Write ``stats.json``, ``runs.csv`` and ``boxplot.csv``; deterministic in ``stats``.

    ``stats`` is one RunStats or a sequence of them with distinct modes.
    """
    all_stats = [stats] if isinstance(stats, RunStats) else list(stats)
    if not all_stats or any(not s.records for s in all_stats):
        raise ConfigurationError("cannot report an empty run list")
    modes = [s.mode for s in all_stats]
    if len(set(modes)) != len(modes):
        raise ConfigurationError(f"duplicate modes in report: {modes}")
    out = Path(out_dir)
    paths = [out / "stats.json", out / "runs.csv", out / "boxplot.csv"]
    for p, text in zip(paths, (stats_json(all_stats), runs_csv(all_stats),
                               boxplot_csv(all_stats))):
        _write(p, text)
    return paths


def read_runs_csv(path) -> dict[str, list[float]]:
    out: dict[str, list[float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["mode"], []).append(float(row["best_q_op"]))
    return out


# -- brute-force oracle --------------------------------------------------------

@dataclass
class OracleResult:
    best: Individual
    count: int
    terms: int


def oracle_count(n_terms: int, max_terms: int) -> int:
    return sum(math.comb(n_terms, k) for k in range(2, max_terms + 1))


def brute_force_oracle(table: DerivativeTable, pool: TokenPool, lam: float = DEFAULT_LAMBDA,
                       budget: int = ORACLE_BUDGET) -> OracleResult:
    """Fit every equation of 2..max_terms distinct pool terms; keep the lowest q_op.

    Parametric tokens are restricted to the pool's parameter lattice.  Ties in
    q_op go to the lower complexity, then to the first enumerated.
    """
    terms = enumerate_terms(pool)
    count = oracle_count(len(terms), pool.max_terms)
    if count > budget:
        raise ConfigurationError(
            f"oracle would enumerate {count} equations, above the budget of {budget}")
    evaluate = Evaluator(table, lam)
    best = None
    for k in range(2, pool.max_terms + 1):
        for combo in itertools.combinations(terms, k):
            ind = evaluate(Equation(combo))
            if best is None or ind.objectives.key() < best.objectives.key():
                best = ind
    return OracleResult(best, evaluate.count, len(terms))
