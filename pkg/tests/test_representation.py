import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdediscover.derivatives import U, DerivativeSpec, analytic_table
from pdediscover.grid import ConfigurationError, build_uniform_grid
from pdediscover.representation import (Derivative, Equation, Parametric, Power, Term,
                                        TokenPool, canonical_equation, canonical_form,
                                        enumerate_terms, equation_from_terms, evaluate_term,
                                        evaluate_token, parse_pool, random_equation, term)

UT, UX = DerivativeSpec("t", 1), DerivativeSpec("x", 1)


@pytest.fixture(scope="module")
def point_table():
    """A 5x5 grid whose (t, x) = (pi/4, .) row carries u=2 / 3, u_x=3."""
    g = build_uniform_grid((0, math.pi / 2), (0, 1), 5, 5)
    return analytic_table({U: lambda t, x: 2 + 0 * t * x, UX: lambda t, x: 3 + 0 * t * x,
                           UT: lambda t, x: t + x}, g)


def test_token_evaluation(point_table):
    u = evaluate_token(Derivative(U), point_table)
    assert np.all(u == 2)
    assert np.all(evaluate_token(Power(U, 2), point_table) == 4)
    s = evaluate_token(Parametric("sin", "t", 2.0), point_table)
    t = point_table.coordinate("t")
    assert s[t == math.pi / 4] == pytest.approx(1.0)
    assert np.all(evaluate_term(term("u", "u_x"), point_table) == 6)
    assert np.array_equal(evaluate_term(term("u_t"), point_table),
                          evaluate_token(Derivative(UT), point_table))
    cs = evaluate_term(Term((Parametric("cos", "t", 1.0), Parametric("sin", "t", 1.0))),
                       point_table)
    assert cs[t == math.pi / 4] == pytest.approx(0.5)
    with pytest.raises(KeyError):
        evaluate_token(Derivative(DerivativeSpec("x", 2)), point_table)


def test_power_of_three(point_table):
    assert np.all(evaluate_token(Power(U, 3), point_table) == 8)
    with pytest.raises(ConfigurationError):
        Power(U, 4)


def test_term_order_symmetric(point_table):
    a = Term((Derivative(U), Derivative(UX), Parametric("sin", "t", 1.0)))
    b = Term((Parametric("sin", "t", 1.0), Derivative(UX), Derivative(U)))
    assert a == b
    assert np.array_equal(evaluate_term(a, point_table), evaluate_term(b, point_table))


def test_term_invariants():
    with pytest.raises(ConfigurationError):
        Term(())
    with pytest.raises(ConfigurationError):
        Term((Parametric("sin", "t", 1.0), Parametric("sin", "t", 1.0)))
    Term((Parametric("sin", "t", 1.0), Parametric("sin", "t", 2.0)))


def test_equation_invariants():
    with pytest.raises(ConfigurationError):
        Equation((term("u"), term("u")))
    with pytest.raises(ConfigurationError):
        Equation((term("u"), term("u_x")), rhs_index=2)
    with pytest.raises(ConfigurationError):
        Equation((term("u"), term("u_x")), 0, (1.0, 2.0))


def test_rendering():
    eq = equation_from_terms(["u_tt", "u_xx"], [1.0, -0.04])
    assert canonical_form(eq)[0] == "d2u/dt2 - 0.04*d2u/dx2 = 0"
    p = Parametric("sin", "t", 2.0, 0.5)
    assert p.render() == "sin(2*t+0.5)"
    assert Power(DerivativeSpec("x", 1), 2).render() == "(du/dx)^2"


def test_canonical_normalization_by_leading_term():
    eq = equation_from_terms(["u_t", ("u", "u_x")], [2.0, 4.0])
    text, coefs = canonical_form(eq)
    assert text == "du/dt + 2*u*du/dx = 0"
    assert np.allclose(coefs, [1.0, 2.0])


def test_canonical_kdv_rhs_remarking():
    cs = Term((Parametric("cos", "t", 1.0), Parametric("sin", "t", 1.0)))
    terms = [term("u_t"), term("u", "u_x"), term("u_xxx"), cs]
    # u_t = -6 u u_x - u_xxx + cos t sin t
    a = Equation(tuple(terms), 0, (-6.0, -1.0, 1.0))
    # u_xxx = -u_t - 6 u u_x + cos t sin t
    b = Equation(tuple(terms), 2, (-1.0, -6.0, 1.0))
    assert canonical_form(a)[0] == canonical_form(b)[0]
    assert canonical_form(a)[0] == "du/dt + 6*u*du/dx + d3u/dx3 - cos(t)*sin(t) = 0"


def test_zero_coefficient_term_dropped():
    eq = Equation((term("u_t"), term("u"), term("u_x")), 0, (0.0, -1.0))
    assert canonical_form(eq)[0] == "du/dt + du/dx = 0"
    bare = Equation((term("u_t"), term("u")), 0, (0.0,))
    assert canonical_form(bare)[0] == "du/dt = 0"


TERMS = [term("u"), term("u_t"), term("u_x"), term("u_xx"), term("u", "u_x"),
         term("u_tt"), Term((Parametric("sin", "t", 1.0),)), term("u", "u")]


@given(st.permutations(range(len(TERMS))), st.integers(2, 5),
       st.floats(0.1, 10) | st.floats(-10, -0.1),
       st.lists(st.floats(0.1, 5), min_size=5, max_size=5), st.data())
def test_canonical_invariances(perm, n, scale, mags, data):
    chosen = [TERMS[i] for i in perm[:n]]
    w = np.array(mags[:n]) * np.where(np.arange(n) % 2, -1, 1)
    eq = equation_from_terms(chosen, w)
    text, coefs = canonical_form(eq)
    # (a) rescaling, (b) reordering, any RHS marking
    order = data.draw(st.permutations(range(n)))
    r = data.draw(st.integers(0, n - 1))
    w2 = scale * w[list(order)]
    terms2 = [chosen[i] for i in order]
    eq2 = Equation(tuple(terms2), r, tuple(-w2[i] / w2[r] for i in range(n) if i != r))
    text2, coefs2 = canonical_form(eq2)
    assert text == text2
    assert np.allclose(coefs, coefs2, rtol=1e-9)
    # idempotence
    assert canonical_form(canonical_equation(eq))[0] == text
    assert canonical_equation(canonical_equation(eq)) == canonical_equation(eq)


def test_parse_pool_and_describe():
    pool = parse_pool("u, u_t,u_xx,u^2,sin(t),cos(x)", max_factors=2, max_terms=4)
    assert pool.describe() == "u,u_t,u_xx,u^2,sin(t),cos(x)"
    assert parse_pool(pool.describe()).describe() == pool.describe()
    for bad in ("", "u_q", "u^7", "tan(t)", "sin(z)"):
        with pytest.raises(ConfigurationError):
            parse_pool(bad)


def test_term_count_formula():
    # 4 tokens, at most 2 factors: singletons + unordered pairs + squares
    pool = parse_pool("u,u_t,u_x,u_xx", max_factors=2)
    terms = enumerate_terms(pool)
    assert len(terms) == 4 + math.comb(4, 2) + 4 == 14
    assert len(set(terms)) == 14


def test_random_equation_bounds_and_determinism():
    pool = parse_pool("u,u_t,u_x", max_factors=1, max_terms=2)
    for seed in range(50):
        eq = random_equation(pool, np.random.default_rng(seed))
        assert len(eq.terms) == 2 and eq.rhs_index in (0, 1)
    a = random_equation(parse_pool("u,u_t,u_x,sin(t)"), np.random.default_rng(7))
    b = random_equation(parse_pool("u,u_t,u_x,sin(t)"), np.random.default_rng(7))
    assert a == b


def test_random_equation_pool_too_small():
    pool = TokenPool((U,), max_factors=1, max_terms=3)
    with pytest.raises(ConfigurationError):
        random_equation(pool, np.random.default_rng(0))


def _check_invariants(eq, pool):
    assert 2 <= len(eq.terms) <= pool.max_terms
    assert len(set(eq.terms)) == len(eq.terms)
    assert 0 <= eq.rhs_index < len(eq.terms)
    lo, hi = pool.frequency_bounds
    for t in eq.terms:
        assert 1 <= t.size <= pool.max_factors
        for tok in t.tokens:
            if isinstance(tok, Parametric):
                assert lo <= tok.frequency <= hi
                assert pool.phase_bounds[0] <= tok.phase <= pool.phase_bounds[1]
            else:
                assert tok.spec in pool.specs


def test_random_equations_satisfy_invariants_10k():
    pools = [parse_pool("u,u_t,u_x,u_xx,u_tt"), parse_pool("u,u_t,u_xxx,sin(t),cos(t)"),
             parse_pool("u,u_x,u^2", max_factors=3, max_terms=4),
             parse_pool("u_t,u_x", max_factors=1, max_terms=2)]
    for seed in range(10_000):
        pool = pools[seed % len(pools)]
        _check_invariants(random_equation(pool, np.random.default_rng(seed)), pool)
