"""Individuals, counted fitness evaluation and per-iteration trace rows."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property

from ..derivatives import DerivativeTable
from ..objectives import Objectives, eval_complexity
from ..regression import DEFAULT_LAMBDA, PRUNE_TOL, fit_equation
from ..representation import Equation, canonical_form


@dataclass(frozen=True, eq=False)
class Individual:
    equation: Equation
    objectives: Objectives

    @cached_property
    def canonical(self) -> str:
        return canonical_form(self.equation)[0]

    @property
    def q_op(self) -> float:
        return self.objectives.q_op

    @property
    def complexity(self) -> int:
        return self.objectives.complexity


@dataclass
class Evaluator:
    """Fits and scores equations on one derivative table, counting calls."""

    table: DerivativeTable
    lam: float = DEFAULT_LAMBDA
    prune_tol: float = PRUNE_TOL
    count: int = 0

    def __call__(self, equation: Equation) -> Individual:
        fitted, q = fit_equation(equation, self.table, self.lam, self.prune_tol)
        self.count += 1
        return Individual(fitted, Objectives(q, eval_complexity(fitted)))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    evaluations: int
    best_q_op: float
    archive_size: int
    hypervolume: float


TRACE_HEADER = ("iteration", "evaluations", "best_q_op", "archive_size", "hypervolume")


def trace_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in rows:
        w.writerow([r.iteration, r.evaluations, repr(r.best_q_op), r.archive_size,
                    repr(r.hypervolume)])
    return buf.getvalue()


@dataclass
class RunResult:
    best: Individual
    archive: "object"
    trace: list = field(default_factory=list)
    evaluations: int = 0
    population: list = field(default_factory=list)
