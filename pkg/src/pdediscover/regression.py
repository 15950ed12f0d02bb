"""LASSO term filtering and least-squares refit of equation coefficients."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .derivatives import DerivativeTable
from .grid import ConfigurationError
from .objectives import INF, discrepancy
from .representation import Equation, Term, evaluate_term

DEFAULT_LAMBDA = 0.05
RIDGE = 1e-12
PRUNE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    """Columns of ``features`` explain ``target``; ``lam`` is the L1 weight."""

    features: np.ndarray
    target: np.ndarray
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.target, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ConfigurationError("feature rows must match the target length")
        if X.shape[1] < 1 or X.shape[0] < X.shape[1]:
            raise ConfigurationError(f"need rows >= columns >= 1, got {X.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ConfigurationError("regression inputs must be finite")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ConfigurationError(f"lambda must be a nonnegative real, got {self.lam}")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_objective(X, y, beta, lam) -> float:
    r = y - X @ beta
    return float(r @ r / (2 * y.size) + lam * np.abs(beta).sum())


def _cd_gram(G, c, yy, lam, tol, max_sweeps, history):
    """Coordinate descent on ``b'Gb/2 - c'b + yy/2 + lam*|b|_1``."""
    p = len(c)
    G = G.tolist()
    c = [float(v) for v in c]
    b = [0.0] * p
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            gjj = G[j][j]
            if gjj == 0.0:
                continue
            row = G[j]
            rho = c[j]
            for k in range(p):
                if k != j and b[k] != 0.0:
                    rho -= row[k] * b[k]
            if rho > lam:
                new = (rho - lam) / gjj
            elif rho < -lam:
                new = (rho + lam) / gjj
            else:
                new = 0.0
            delta = max(delta, abs(new - b[j]))
            b[j] = new
        if history is not None:
            bv = np.array(b)
            Gv = np.array(G)
            history.append(float(0.5 * bv @ Gv @ bv - np.dot(c, bv) + 0.5 * yy
                                 + lam * np.abs(bv).sum()))
        if delta < tol:
            break
    return np.array(b)


def coordinate_descent(X, y, lam, tol=1e-9, max_sweeps=10_000, history=None):
    """Minimize ``||X b - y||^2 / (2N) + lam * ||b||_1`` by cyclic coordinate descent.

    When ``history`` is a list, the objective after every sweep is appended.
    """
    n = X.shape[0]
    return _cd_gram(X.T @ X / n, X.T @ y / n, float(y @ y) / n, lam, tol, max_sweeps,
                    history)


def _unit_rms(M):
    scale = np.sqrt(np.einsum("ij,ij->j", M, M) / M.shape[0])
    out = np.zeros_like(M)
    live = scale > 0
    out[:, live] = M[:, live] / scale[live]
    return out, scale


def _standardize(problem: RegressionProblem):
    Xs, col = _unit_rms(problem.features)
    ys, ysc = _unit_rms(problem.target[:, None])
    return Xs, ys[:, 0], col, float(ysc[0])


def lambda_max(problem: RegressionProblem) -> float:
    """Smallest lambda for which the standardized LASSO solution is all zero."""
    Xs, ys, _, _ = _standardize(problem)
    return float(np.max(np.abs(Xs.T @ ys)) / ys.size)


def _destandardize(beta_s, col, ys):
    beta = np.zeros_like(beta_s)
    live = col > 0
    beta[live] = beta_s[live] * ys / col[live]
    return beta


def lasso_fit(problem: RegressionProblem, tol=1e-9, max_sweeps=10_000, history=None):
    """LASSO on unit-RMS columns and target; coefficients in the original scale."""
    Xs, ys, col, yscale = _standardize(problem)
    if yscale == 0:
        return np.zeros(Xs.shape[1])
    beta_s = coordinate_descent(Xs, ys, problem.lam, tol, max_sweeps, history)
    return _destandardize(beta_s, col, yscale)


def _ols_gram(G, c, active, prune_tol):
    beta = np.zeros(len(c))
    active = list(active)
    while active:
        A = np.ix_(active, active)
        sol = np.linalg.solve(G[A] + RIDGE * np.eye(len(active)), c[active])
        beta[:] = 0.0
        beta[active] = sol
        keep = [j for j, v in zip(active, sol) if abs(v) >= prune_tol]
        if keep == active:
            break
        active = keep
    else:
        beta[:] = 0.0
    return beta


def ols_refit(problem: RegressionProblem, active, prune_tol: float = 0.0):
    """Least squares restricted to ``active`` columns; others are exactly zero.

    Solved by the normal equations on unit-RMS columns with a 1e-12 ridge.
    With ``prune_tol > 0``, columns whose standardized coefficient falls below
    it are removed and the fit repeated.
    """
    Xs, ys, col, yscale = _standardize(problem)
    if yscale == 0:
        return np.zeros(Xs.shape[1])
    n = ys.size
    active = sorted(int(j) for j in active if col[j] > 0)
    beta_s = _ols_gram(Xs.T @ Xs / n, Xs.T @ ys / n, active, prune_tol)
    return _destandardize(beta_s, col, yscale)


def _fit_terms(terms, values, lam, prune_tol):
    """Best RHS choice for fixed terms: (q, rhs, weights) or None if none qualifies.

    Only non-vanishing terms holding a token of u may be the RHS, so a fitted
    equation always involves the field and never reduces to an identity
    between coordinate functions.
    """
    n = len(terms)
    V = np.column_stack(values)
    Vs, scale = _unit_rms(V)
    live = scale > 0
    candidates = [r for r in range(n) if live[r] and terms[r].specs]
    if not candidates:
        return None
    G = Vs.T @ Vs / V.shape[0]
    best = None
    for r in candidates:
        others = [i for i in range(n) if i != r]
        weights = np.zeros(n)
        if others:
            Go = G[np.ix_(others, others)]
            co = G[others, r]
            b = _cd_gram(Go, co, 1.0, lam, 1e-9, 10_000, None)
            b = _ols_gram(Go, co, list(np.flatnonzero(b)), prune_tol)
            col = scale[others]
            weights[others] = np.where(col > 0, b * scale[r] / np.where(col > 0, col, 1.0), 0.0)
        weights[r] = -1.0
        q = discrepancy(values, weights)
        if best is None or q < best[0]:
            best = (q, r, weights)
    return best


def common_factor(terms) -> tuple:
    """Tokens present (with multiplicity) in every given term."""
    shared = Counter(terms[0].tokens)
    for t in terms[1:]:
        shared &= Counter(t.tokens)
    return tuple(shared.elements())


def divide_out(t: Term, factor) -> Term | None:
    rest = Counter(t.tokens)
    rest.subtract(Counter(factor))
    tokens = tuple(rest.elements())
    return Term(tokens) if tokens else None


def fit_equation(equation: Equation, table: DerivativeTable, lam: float = DEFAULT_LAMBDA,
                 prune_tol: float = PRUNE_TOL) -> tuple[Equation, float]:
    """Fit coefficients trying every eligible term as the RHS.

    Terms are put in canonical order first, so the result does not depend on
    the order they were listed in.  When all active terms share a factor it is
    divided out and the reduced structure refitted.  Returns the fitted
    equation and its operator discrepancy (inf when no term can be the RHS).
    """
    terms = sorted(equation.terms)
    values = [evaluate_term(t, table) for t in terms]
    n = len(terms)
    best = _fit_terms(terms, values, lam, prune_tol)
    if best is None:
        return Equation(tuple(terms), 0, (0.0,) * (n - 1), lam, degenerate=True), INF
    q, r, weights = best
    active = [terms[i] for i in range(n) if weights[i] != 0.0]
    factor = common_factor(active) if len(active) > 1 else ()
    if factor:
        reduced = [divide_out(t, factor) for t in active]
        if all(t is not None for t in reduced):
            rest = [t for i, t in enumerate(terms) if weights[i] == 0.0 and t not in reduced]
            return fit_equation(Equation(tuple(reduced + rest)), table, lam, prune_tol)
    coefs = tuple(float(weights[i]) for i in range(n) if i != r)
    return Equation(tuple(terms), r, coefs, lam), q
