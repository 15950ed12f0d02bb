"""Quality metrics of a fitted equation: operator discrepancy and complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .derivatives import DerivativeTable
from .representation import Equation, evaluate_term

INF = math.inf
EXACT_TOL = 1e-9


@dataclass(frozen=True)
class Objectives:
    q_op: float
    complexity: int

    def vector(self) -> tuple[float, float]:
        return (self.q_op, float(self.complexity))

    def key(self) -> tuple[float, int]:
        """Single-objective ordering: discrepancy, ties broken by complexity."""
        return (self.q_op, self.complexity)


def operator_residual(values: Sequence[np.ndarray], weights) -> np.ndarray:
    """``sum_i w_i * values_i``, accumulated in the given order."""
    out = np.zeros_like(values[0])
    for v, w in zip(values, weights):
        if w != 0.0:
            out = out + w * v
    return out


def rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(v))))


def discrepancy(values: Sequence[np.ndarray], weights) -> float:
    """RMS of the weighted term sum, snapped to 0 below numerical resolution.

    The cut-off is ``EXACT_TOL`` times the largest weighted term RMS; residuals
    that small are floating-point artifacts of an exactly satisfied equation.
    """
    q = rms(operator_residual(values, weights))
    scale = max((abs(w) * rms(v) for v, w in zip(values, weights) if w != 0.0), default=0.0)
    return 0.0 if q <= EXACT_TOL * scale else q


def eval_q_op(equation: Equation, table: DerivativeTable) -> float:
    """RMS over the interior mask of ``sum a_i T_i - T_rhs``; inf if degenerate."""
    if equation.degenerate:
        return INF
    values = [evaluate_term(t, table) for t in equation.terms]
    return discrepancy(values, equation.full_coefficients())


def eval_complexity(equation: Equation) -> int:
    """Token count of the active terms, the RHS included."""
    if equation.degenerate:
        return 0
    c = equation.full_coefficients()
    return int(sum(t.size for t, w in zip(equation.terms, c) if w != 0.0))


def evaluate(equation: Equation, table: DerivativeTable) -> Objectives:
    return Objectives(eval_q_op(equation, table), eval_complexity(equation))
