"""Equation encoding: tokens, product terms and linear combinations of terms.

An equation is a fixed three-level structure: a sum of terms, each term a
product of tokens.  One term is marked as the right-hand side, so a fitted
equation reads ``sum_{i != rhs} a_i * T_i - T_rhs = 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .derivatives import SPACE, TIME, U, DerivativeSpec, DerivativeTable
from .grid import ConfigurationError

FAMILIES = ("cos", "sin")
MAX_RETRIES = 64


@dataclass(frozen=True)
class Derivative:
    spec: DerivativeSpec

    def render(self) -> str:
        return self.spec.render()


@dataclass(frozen=True)
class Power:
    spec: DerivativeSpec
    exponent: int

    def __post_init__(self):
        if self.exponent not in (2, 3):
            raise ConfigurationError(f"power exponent must be 2 or 3, got {self.exponent}")

    def render(self) -> str:
        base = self.spec.render()
        if self.spec.order > 0:
            base = f"({base})"
        return f"{base}^{self.exponent}"


@dataclass(frozen=True)
class Parametric:
    family: str
    axis: str
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown parametric family {self.family!r}")
        if self.axis not in (TIME, SPACE):
            raise ConfigurationError(f"unknown axis {self.axis!r}")

    def render(self) -> str:
        f, p = self.frequency, self.phase
        arg = self.axis if f == 1 else f"{f:.6g}*{self.axis}"
        if p > 0:
            arg += f"+{p:.6g}"
        elif p < 0:
            arg += f"-{-p:.6g}"
        return f"{self.family}({arg})"

    def with_params(self, frequency: float, phase: float) -> "Parametric":
        return Parametric(self.family, self.axis, float(frequency), float(phase))

    @property
    def shape(self) -> tuple[str, str]:
        return (self.family, self.axis)


Token = Union[Derivative, Power, Parametric]


def token_key(token: Token) -> tuple:
    """Total order on tokens.

    Time derivatives sort first, then space derivatives by order, then the
    plain field (and its powers), then parametric functions.
    """
    if isinstance(token, Parametric):
        return (3, 0, 0, token.family, token.axis,
                round(token.frequency, 6), round(token.phase, 6),
                token.frequency, token.phase)
    spec = token.spec
    exponent = token.exponent if isinstance(token, Power) else 1
    if spec.order == 0:
        cat = 2
    else:
        cat = 0 if spec.axis == TIME else 1
    return (cat, spec.order, exponent, "", "", 0.0, 0.0, 0.0, 0.0)


_DISPLAY_RANK = {2: 0, 0: 1, 1: 2, 3: 3}


def _display_key(token: Token) -> tuple:
    key = token_key(token)
    return (_DISPLAY_RANK[key[0]],) + key[1:]


@dataclass(frozen=True)
class Term:
    tokens: tuple

    def __post_init__(self):
        if not self.tokens:
            raise ConfigurationError("a term needs at least one token")
        tokens = tuple(sorted(self.tokens, key=token_key))
        params = [t for t in tokens if isinstance(t, Parametric)]
        if len(set(params)) != len(params):
            raise ConfigurationError("duplicate parametric token in term")
        object.__setattr__(self, "tokens", tokens)

    @property
    def key(self) -> tuple:
        return tuple(token_key(t) for t in self.tokens)

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def shape_key(self) -> tuple:
        """Key ignoring parametric token parameters."""
        return tuple(
            ("param",) + t.shape if isinstance(t, Parametric) else token_key(t)[:3]
            for t in self.tokens
        )

    @property
    def specs(self) -> set[DerivativeSpec]:
        return {t.spec for t in self.tokens if not isinstance(t, Parametric)}

    def render(self) -> str:
        return "*".join(t.render() for t in sorted(self.tokens, key=_display_key))

    def __lt__(self, other: "Term") -> bool:
        return self.key < other.key


def term(*tokens) -> Term:
    """Convenience constructor accepting labels such as ``"u_x"``."""
    out = []
    for tok in tokens:
        out.append(Derivative(DerivativeSpec.parse(tok)) if isinstance(tok, str) else tok)
    return Term(tuple(out))


@dataclass(frozen=True)
class Equation:
    terms: tuple
    rhs_index: int = 0
    coefficients: tuple | None = None
    sparsity: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ConfigurationError("an equation needs at least one term")
        if len(set(terms)) != len(terms):
            raise ConfigurationError("equation terms must be pairwise distinct")
        if not 0 <= self.rhs_index < len(terms):
            raise ConfigurationError(f"rhs_index {self.rhs_index} out of range")
        if self.coefficients is not None:
            coefs = tuple(float(c) for c in self.coefficients)
            if len(coefs) != len(terms) - 1:
                raise ConfigurationError("need one coefficient per non-RHS term")
            object.__setattr__(self, "coefficients", coefs)

    @property
    def fitted(self) -> bool:
        return self.coefficients is not None

    @property
    def rhs(self) -> Term:
        return self.terms[self.rhs_index]

    def full_coefficients(self) -> np.ndarray:
        """Weights ``c`` with ``sum(c_i * T_i) = 0``; the RHS weight is -1."""
        if self.coefficients is None:
            raise ValueError("equation is not fitted")
        c = np.empty(len(self.terms))
        others = [i for i in range(len(self.terms)) if i != self.rhs_index]
        c[others] = self.coefficients
        c[self.rhs_index] = -1.0
        return c

    def unfitted(self) -> "Equation":
        return Equation(self.terms, self.rhs_index)


@dataclass(frozen=True)
class ParametricFamily:
    family: str
    axis: str


@dataclass(frozen=True)
class TokenPool:
    derivatives: tuple
    powers: tuple = ()
    parametric: tuple = ()
    frequency_bounds: tuple = (0.5, 4.0)
    phase_bounds: tuple = (0.0, 2 * math.pi)
    frequency_lattice: tuple = (1.0, 2.0)
    phase_lattice: tuple = (0.0,)
    max_factors: int = 2
    max_terms: int = 5

    def __post_init__(self):
        object.__setattr__(self, "derivatives", tuple(self.derivatives))
        object.__setattr__(self, "powers", tuple(self.powers))
        object.__setattr__(self, "parametric", tuple(self.parametric))
        if not self.derivatives:
            raise ConfigurationError("token pool needs at least one derivative token")
        if self.max_factors < 1 or self.max_terms < 2:
            raise ConfigurationError("need max_factors >= 1 and max_terms >= 2")
        lo, hi = self.frequency_bounds
        if not 0 < lo < hi:
            raise ConfigurationError("frequency bounds must satisfy 0 < f_min < f_max")
        if self.phase_bounds[1] <= self.phase_bounds[0]:
            raise ConfigurationError("phase bounds must be increasing")
        for f in self.frequency_lattice:
            if not lo <= f <= hi:
                raise ConfigurationError(f"lattice frequency {f} outside bounds")
        for p in self.phase_lattice:
            if not self.phase_bounds[0] <= p <= self.phase_bounds[1]:
                raise ConfigurationError(f"lattice phase {p} outside bounds")

    @property
    def specs(self) -> set[DerivativeSpec]:
        return set(self.derivatives) | {p.spec for p in self.powers} | {U}

    def fixed_tokens(self) -> list:
        return [Derivative(s) for s in self.derivatives] + list(self.powers)

    def lattice_tokens(self) -> list:
        """Every token, with parametric ones placed on the parameter lattice."""
        out = self.fixed_tokens()
        for fam in self.parametric:
            for f in self.frequency_lattice:
                for p in self.phase_lattice:
                    out.append(Parametric(fam.family, fam.axis, float(f), float(p)))
        return out

    def describe(self) -> str:
        labels = [s.label for s in self.derivatives]
        labels += [f"{p.spec.label}^{p.exponent}" for p in self.powers]
        labels += [f"{p.family}({p.axis})" for p in self.parametric]
        return ",".join(labels)


def parse_pool(text: str, max_factors: int = 2, max_terms: int = 5, **kwargs) -> TokenPool:
    """Parse a comma separated pool such as ``"u,u_t,u_xx,u^2,sin(t)"``."""
    derivs, powers, params = [], [], []
    for raw in text.split(","):
        item = raw.strip()
        if not item:
            continue
        if item.endswith(")") and "(" in item:
            fam, axis = item[:-1].split("(", 1)
            params.append(ParametricFamily(fam.strip(), axis.strip()))
            if fam.strip() not in FAMILIES or axis.strip() not in (TIME, SPACE):
                raise ConfigurationError(f"bad parametric token {item!r}")
        elif "^" in item:
            base, exp = item.split("^", 1)
            try:
                powers.append(Power(DerivativeSpec.parse(base), int(exp)))
            except ValueError:
                raise ConfigurationError(f"bad power token {item!r}") from None
        else:
            derivs.append(DerivativeSpec.parse(item))
    return TokenPool(tuple(dict.fromkeys(derivs)), tuple(dict.fromkeys(powers)),
                     tuple(dict.fromkeys(params)), max_factors=max_factors,
                     max_terms=max_terms, **kwargs)


def enumerate_terms(pool: TokenPool) -> list[Term]:
    """All terms of 1..max_factors lattice tokens (repetition allowed), sorted."""
    tokens = sorted(pool.lattice_tokens(), key=token_key)
    out = set()
    for k in range(1, pool.max_factors + 1):
        for combo in itertools.combinations_with_replacement(tokens, k):
            try:
                out.add(Term(combo))
            except ConfigurationError:
                continue
    return sorted(out)


# -- evaluation ---------------------------------------------------------------

def evaluate_token(token: Token, table: DerivativeTable) -> np.ndarray:
    if isinstance(token, Derivative):
        return table.values(token.spec)
    if isinstance(token, Power):
        return table.values(token.spec) ** token.exponent
    fn = np.sin if token.family == "sin" else np.cos
    return fn(token.frequency * table.coordinate(token.axis) + token.phase)


def evaluate_term(term: Term, table: DerivativeTable) -> np.ndarray:
    key = ("term", term)
    cached = table._cache.get(key)
    if cached is None:
        cached = evaluate_token(term.tokens[0], table)
        for tok in term.tokens[1:]:
            cached = cached * evaluate_token(tok, table)
        cached = np.array(cached, dtype=float)
        cached.flags.writeable = False
        table._cache[key] = cached
    return cached


# -- canonical form -----------------------------------------------------------

def _render(terms: Sequence[Term], coefs: np.ndarray, digits: int) -> str:
    parts = []
    for i, (t, c) in enumerate(zip(terms, coefs)):
        mag = format(abs(c), f".{digits}g")
        body = t.render() if mag == "1" else f"{mag}*{t.render()}"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) + " = 0"


def canonical_terms(equation: Equation) -> tuple[list[Term], np.ndarray]:
    """Surviving terms in canonical order and coefficients scaled so the first is 1."""
    c = equation.full_coefficients()
    keep = [i for i in range(len(c)) if c[i] != 0.0]
    if not keep:
        keep = [equation.rhs_index]
    order = sorted(keep, key=lambda i: equation.terms[i].key)
    terms = [equation.terms[i] for i in order]
    coefs = np.array([c[i] for i in order])
    return terms, coefs / coefs[0]


def canonical_form(equation: Equation, digits: int = 6) -> tuple[str, np.ndarray]:
    """Deterministic rendering independent of RHS choice, scaling and term order."""
    terms, coefs = canonical_terms(equation)
    return _render(terms, coefs, digits), coefs


def canonical_equation(equation: Equation) -> Equation:
    """Equation rebuilt from its canonical form (leading term marked as RHS)."""
    terms, coefs = canonical_terms(equation)
    return Equation(tuple(terms), 0, tuple(-coefs[1:]), equation.sparsity)


def equation_from_terms(terms, weights, sparsity=None) -> Equation:
    """Equation for ``sum(w_i * T_i) = 0``; the first nonzero weight becomes the RHS."""
    terms = [t if isinstance(t, Term) else term(*t) if isinstance(t, tuple) else term(t)
             for t in terms]
    w = np.asarray(weights, dtype=float)
    r = int(np.flatnonzero(w)[0])
    coefs = [-w[i] / w[r] for i in range(len(terms)) if i != r]
    return Equation(tuple(terms), r, tuple(coefs), sparsity)


# -- random construction ------------------------------------------------------

def sample_parametric(pool: TokenPool, rng: np.random.Generator) -> Parametric:
    fam = pool.parametric[rng.integers(len(pool.parametric))]
    f = pool.frequency_lattice[rng.integers(len(pool.frequency_lattice))]
    p = pool.phase_lattice[rng.integers(len(pool.phase_lattice))]
    return Parametric(fam.family, fam.axis, float(f), float(p))


def sample_token(pool: TokenPool, rng: np.random.Generator) -> Token:
    fixed = pool.fixed_tokens()
    k = rng.integers(len(fixed) + len(pool.parametric))
    if k < len(fixed):
        return fixed[k]
    return sample_parametric(pool, rng)


def random_term(pool: TokenPool, rng: np.random.Generator) -> Term:
    for _ in range(MAX_RETRIES):
        k = int(rng.integers(1, pool.max_factors + 1))
        try:
            return Term(tuple(sample_token(pool, rng) for _ in range(k)))
        except ConfigurationError:
            continue
    raise ConfigurationError("could not sample a valid term from the token pool")


def max_distinct_terms(pool: TokenPool) -> float:
    if pool.parametric:
        return math.inf
    return len(enumerate_terms(pool))


def random_equation(pool: TokenPool, rng: np.random.Generator) -> Equation:
    available = max_distinct_terms(pool)
    if available < 2:
        raise ConfigurationError(
            f"token pool {pool.describe()!r} yields fewer than two distinct terms"
        )
    n = int(rng.integers(2, pool.max_terms + 1))
    n = int(min(n, available))
    terms: list[Term] = []
    misses = 0
    while len(terms) < n:
        t = random_term(pool, rng)
        if t in terms:
            misses += 1
            if misses > MAX_RETRIES:
                raise ConfigurationError("token pool too small to build distinct terms")
            continue
        terms.append(t)
    return Equation(tuple(terms), int(rng.integers(n)))
