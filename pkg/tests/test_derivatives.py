import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdediscover.derivatives import (U, DerivativeSpec, analytic_table, build_table,
                                     finite_diff, interior_mask, stencil_weights)
from pdediscover.grid import ConfigurationError, Field, build_uniform_grid

UX, UXX, UXXX = (DerivativeSpec("x", k) for k in (1, 2, 3))
UT, UTT = DerivativeSpec("t", 1), DerivativeSpec("t", 2)


def x_field(fn, dx, n=None, nt=5):
    n = n or int(round(2 / dx)) + 1
    g = build_uniform_grid((0, 1), (0, dx * (n - 1)), nt, n)
    T, X = g.mesh()
    return Field(fn(X) + 0 * T, g), g.x_axis


# Textbook finite-difference weights (Fornberg's tables), written out by hand.
@pytest.mark.parametrize("offsets,order,expected", [
    ((-1, 0, 1), 1, (-0.5, 0, 0.5)),
    ((-1, 0, 1), 2, (1, -2, 1)),
    ((-2, -1, 0, 1, 2), 3, (-0.5, 1, 0, -1, 0.5)),
    ((0, 1, 2), 1, (-1.5, 2, -0.5)),
    ((0, 1, 2, 3), 2, (2, -5, 4, -1)),
    ((0, 1, 2, 3, 4), 3, (-2.5, 9, -12, 7, -1.5)),
])
def test_stencil_weights_match_tables(offsets, order, expected):
    assert np.allclose(stencil_weights(offsets, order), expected, atol=1e-12)


def test_spec_labels_and_limits():
    assert DerivativeSpec.parse("u_xxx") == UXXX
    assert DerivativeSpec("x", 0) == U and U.label == "u"
    assert UTT.render() == "d2u/dt2" and UX.render() == "du/dx"
    for bad in [("t", 3), ("x", 4), ("y", 1), ("x", -1)]:
        with pytest.raises(ConfigurationError):
            DerivativeSpec(*bad)
    with pytest.raises(ConfigurationError):
        DerivativeSpec.parse("v_x")


def test_constant_field_has_zero_derivatives():
    g = build_uniform_grid((0, 1), (0, 1), 9, 9)
    f = Field(np.full(g.shape, 3.7), g)
    for spec in (UT, UTT, UX, UXX, UXXX):
        assert np.allclose(finite_diff(f, spec).values, 0.0, atol=1e-9)
    assert finite_diff(f, U) is f


def test_quadratic_exact_interior():
    f, x = x_field(lambda X: X**2, 0.1, n=21)
    d = finite_diff(f, UX).values[2]
    assert np.allclose(d[1:-1], 2 * x[1:-1], atol=1e-12)
    assert np.allclose(d, 2 * x, atol=1e-10)  # one-sided stencils are exact too


def test_sin_first_derivative_error_bound():
    f, x = x_field(np.sin, 0.01, n=629)
    err = np.abs(finite_diff(f, UX).values[0, 1:-1] - np.cos(x[1:-1])).max()
    assert err <= 2e-5
    assert err <= 0.01**2 / 6 * 1.0001


@pytest.mark.parametrize("spec,deriv", [
    (UX, np.cos), (UXX, lambda x: -np.sin(x)), (UXXX, lambda x: -np.cos(x))])
def test_convergence_order_two(spec, deriv):
    errs = []
    for dx in (0.04, 0.02, 0.01):
        f, x = x_field(np.sin, dx, n=int(round(3 / dx)) + 1)
        m = spec.order + 1
        errs.append(np.abs(finite_diff(f, spec).values[0, m:-m] - deriv(x[m:-m])).max())
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    assert all(3.5 <= r <= 4.5 for r in ratios), ratios


def test_time_derivative_along_axis0():
    g = build_uniform_grid((0, 1), (0, 1), 41, 7)
    T, X = g.mesh()
    f = Field(np.exp(T) * (1 + X), g)
    d = finite_diff(f, UTT).values
    assert np.abs(d[3:-3] - f.values[3:-3]).max() < 1e-3


@given(st.integers(0, 2), st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_polynomials_of_degree_two_are_exact(order_shift, coefs):
    a, b, c = coefs
    f, x = x_field(lambda X: a + b * X + c * X**2, 0.05, n=30)
    d1 = finite_diff(f, UX).values[0]
    d2 = finite_diff(f, UXX).values[0]
    assert np.allclose(d1, b + 2 * c * x, atol=1e-9)
    assert np.allclose(d2, 2 * c, atol=1e-7)


@given(st.lists(st.floats(-100, 100), min_size=45, max_size=45))
def test_negation_commutes_exactly(vals):
    g = build_uniform_grid((0, 1), (0, 1), 5, 9)
    f = Field(np.array(vals).reshape(5, 9), g)
    neg = Field(-f.values, g)
    for spec in (UT, UTT, UX, UXX, UXXX):
        assert np.array_equal(finite_diff(neg, spec).values, -finite_diff(f, spec).values)


def test_too_few_points_for_order():
    g = build_uniform_grid((0, 1), (0, 1), 5, 5)
    f = Field(np.zeros((5, 5)), g)
    finite_diff(f, UXXX)  # 5 points suffice for the 5-point stencil
    with pytest.raises(ConfigurationError):
        DerivativeSpec("t", 3)


def test_build_table_and_mask():
    g = build_uniform_grid((0, 1), (0, 1), 101, 101)
    T, X = g.mesh()
    f = Field(np.sin(X) * np.cos(T), g)
    tab = build_table(f, [UT, UXX, UT])
    assert set(tab.fields) == {U, UT, UXX}
    assert tab.n_points == (101 - 4) * (101 - 6)
    with pytest.raises(ConfigurationError):
        build_table(f, [])
    mask = interior_mask(g, [UXXX])
    assert not mask[:, :4].any() and not mask[:, -4:].any() and mask[:, 4:-4].all()
    assert mask.all(axis=1).sum() == 0 and mask[:, 4].all()
    assert tab.values(UT).shape == (tab.n_points,)
    assert np.array_equal(tab.coordinate("x"), X[tab.interior_mask])


def test_analytic_table():
    g = build_uniform_grid((0, 1), (0, 1), 11, 11)
    formulas = {U: lambda t, x: x / (1 + t), UX: lambda t, x: 1 / (1 + t)}
    tab = analytic_table(formulas, g)
    assert tab.interior_mask.all()
    assert tab.fields[UX][-1, 4] == pytest.approx(0.5)
    with pytest.raises(ConfigurationError, match="u_xx"):
        analytic_table(formulas, g, [UXX])


def test_wave_analytic_utt_value(wave_case):
    # single-mode check of the evaluator convention: d2/dt2 cos(kt) = -k^2 cos(kt)
    tab = wave_case.table("analytic")
    T, X = wave_case.grid.mesh()
    expected = sum(-a * (0.2 * k * math.pi) ** 2 * np.sin(k * math.pi * X)
                   * np.cos(0.2 * k * math.pi * T) for a, k in ((1.0, 1), (0.5, 2)))
    assert np.allclose(tab.fields[UTT], expected, atol=1e-12)


@pytest.mark.parametrize("spec", [UT, UTT, UX, UXX, UXXX])
def test_analytic_and_numeric_agree(wave_case, spec):
    num = wave_case.table("numeric", [spec])
    ana = wave_case.table("analytic", [spec])
    m = num.interior_mask
    diff = np.abs(num.fields[spec][m] - ana.fields[spec][m]).max()
    assert diff < 5e-3 * max(1.0, np.abs(ana.fields[spec]).max())
