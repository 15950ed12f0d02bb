"""Mutation and term-level crossover of candidate equations."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid import ConfigurationError
from .representation import (MAX_RETRIES, Equation, Parametric, Term, TokenPool,
                             random_term, sample_token)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorConfig:
    crossover_rate: float = 0.3
    mutation_rate: float = 0.6
    param_sigma: float = 0.1

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if not self.param_sigma > 0:
            raise ConfigurationError("param_sigma must be positive")


def jitter_parameter(token: Parametric, which: str, pool: TokenPool, sigma: float,
                     z: float) -> Parametric:
    """Shift frequency or phase by ``z * sigma * range``, clamped to the bounds."""
    lo, hi = pool.frequency_bounds if which == "frequency" else pool.phase_bounds
    value = getattr(token, which) + z * sigma * (hi - lo)
    value = float(min(max(value, lo), hi))
    if which == "frequency":
        return token.with_params(value, token.phase)
    return token.with_params(token.frequency, value)


def _swap_token(t: Term, pool: TokenPool, rng) -> Term:
    tokens = list(t.tokens)
    tokens[rng.integers(len(tokens))] = sample_token(pool, rng)
    return Term(tuple(tokens))


def _jitter_term(t: Term, pool: TokenPool, sigma: float, rng) -> Term:
    idx = [i for i, tok in enumerate(t.tokens) if isinstance(tok, Parametric)]
    i = idx[rng.integers(len(idx))]
    which = "frequency" if rng.random() < 0.5 else "phase"
    tokens = list(t.tokens)
    tokens[i] = jitter_parameter(tokens[i], which, pool, sigma, rng.standard_normal())
    return Term(tuple(tokens))


def _mutate_term(t: Term, pool: TokenPool, config: OperatorConfig, rng) -> Term:
    actions = ["replace", "swap"]
    if any(isinstance(tok, Parametric) for tok in t.tokens):
        actions.append("jitter")
    action = actions[rng.integers(len(actions))]
    if action == "replace":
        return random_term(pool, rng)
    if action == "swap":
        return _swap_token(t, pool, rng)
    return _jitter_term(t, pool, config.param_sigma, rng)


def mutate(equation: Equation, pool: TokenPool, config: OperatorConfig,
           rng: np.random.Generator) -> Equation:
    """Each term mutates independently with probability ``mutation_rate``."""
    terms = list(equation.terms)
    changed = False
    for i in range(len(terms)):
        if rng.random() >= config.mutation_rate:
            continue
        for _ in range(MAX_RETRIES):
            try:
                new = _mutate_term(terms[i], pool, config, rng)
            except ConfigurationError:
                continue
            if new != terms[i] and new not in terms:
                terms[i] = new
                changed = True
                break
        else:
            log.warning("mutation retries exhausted; keeping the equation unchanged")
            return equation
    if not changed:
        return equation
    return Equation(tuple(terms), equation.rhs_index)


def _blend_params(a: Term, b: Term, rng) -> tuple[Term, Term]:
    """Draw every differing parameter uniformly between the parents' values."""
    ca, cb = list(a.tokens), list(b.tokens)
    pa = [i for i, t in enumerate(ca) if isinstance(t, Parametric)]
    pb = [i for i, t in enumerate(cb) if isinstance(t, Parametric)]
    # equal shape keys => parametric tokens line up family by family
    pa.sort(key=lambda i: ca[i].shape)
    pb.sort(key=lambda i: cb[i].shape)
    for i, j in zip(pa, pb):
        ta, tb = ca[i], cb[j]
        params = []
        for name in ("frequency", "phase"):
            lo, hi = sorted((getattr(ta, name), getattr(tb, name)))
            params.append((rng.uniform(lo, hi), rng.uniform(lo, hi)))
        ca[i] = ta.with_params(params[0][0], params[1][0])
        cb[j] = tb.with_params(params[0][1], params[1][1])
    return Term(tuple(ca)), Term(tuple(cb))


def classify_terms(a: Equation, b: Equation):
    """Split term indices into identical pairs, parameter-only pairs and unique leftovers."""
    identical, similar = [], []
    left_a = list(range(len(a.terms)))
    left_b = list(range(len(b.terms)))
    for i in list(left_a):
        if a.terms[i] in b.terms:
            j = b.terms.index(a.terms[i])
            identical.append((i, j))
            left_a.remove(i)
            left_b.remove(j)
    for i in list(left_a):
        for j in left_b:
            if a.terms[i].shape_key == b.terms[j].shape_key:
                similar.append((i, j))
                left_a.remove(i)
                left_b.remove(j)
                break
    return identical, similar, left_a, left_b


def crossover(a: Equation, b: Equation, config: OperatorConfig,
              rng: np.random.Generator) -> tuple[Equation, Equation]:
    _, similar, unique_a, unique_b = classify_terms(a, b)
    ta, tb = list(a.terms), list(b.terms)

    def place(i, j, new_a, new_b):
        # a swap that would duplicate an existing term keeps the parent terms
        if new_a in ta[:i] + ta[i + 1:] or new_b in tb[:j] + tb[j + 1:]:
            return
        ta[i], tb[j] = new_a, new_b

    for i, j in similar:
        if rng.random() < config.crossover_rate:
            place(i, j, *_blend_params(ta[i], tb[j], rng))
    if unique_a and unique_b:
        k = min(len(unique_a), len(unique_b))
        pick_a = rng.permutation(unique_a)[:k]
        pick_b = rng.permutation(unique_b)[:k]
        for i, j in zip(pick_a, pick_b):
            if rng.random() < config.crossover_rate:
                place(int(i), int(j), tb[j], ta[i])
    child_a = a if ta == list(a.terms) else Equation(tuple(ta), a.rhs_index)
    child_b = b if tb == list(b.terms) else Equation(tuple(tb), b.rhs_index)
    return child_a, child_b
