import math

import numpy as np
import pytest

from pdediscover.derivatives import DerivativeSpec
from pdediscover.grid import ConfigurationError
from pdediscover.objectives import eval_q_op
from pdediscover.representation import Parametric, equation_from_terms, term
from pdediscover.synthetic import (CASES, gen_kdv, integrate_kdv, kdv_dt_limit, make_case,
                                   periodic_x_grid, soliton)

S = {k: DerivativeSpec.parse(k) for k in ("u", "u_t", "u_tt", "u_x", "u_xx", "u_xxx")}


def kdv_true():
    cs = (Parametric("cos", "t", 1.0), Parametric("sin", "t", 1.0))
    return equation_from_terms(["u_t", ("u", "u_x"), "u_xxx", term(*cs)], [1, 6, 1, -1])


def test_wave_values_and_residual(wave_case):
    assert wave_case.grid.shape == (101, 101)
    assert wave_case.analytic[S["u"]](0.0, 0.5) == pytest.approx(1.0)
    T, X = wave_case.grid.mesh()
    a = wave_case.analytic
    res = a[S["u_tt"]](T, X) - 0.04 * a[S["u_xx"]](T, X)
    assert np.abs(res).max() <= 1e-12
    assert wave_case.true_equation == "d2u/dt2 - 0.04*d2u/dx2 = 0"


def test_burgers_solution_follows_characteristics(burgers_case):
    """Independent check: u is constant along x = xi + t*u0(xi), u0(xi) = xi + 0.5 xi^2."""
    a = burgers_case.analytic
    for t in (0.0, 0.3, 1.0):
        xi = np.linspace(0, 0.6, 13)
        u0 = xi + 0.5 * xi**2
        x = xi + t * u0
        assert np.allclose(a[S["u"]](t, x), u0, atol=1e-12)
    T, X = burgers_case.grid.mesh()
    res = a[S["u_t"]](T, X) + a[S["u"]](T, X) * a[S["u_x"]](T, X)
    assert np.abs(res).max() <= 1e-12
    assert burgers_case.true_equation == "du/dt + u*du/dx = 0"


@pytest.mark.parametrize("spec", ["u_t", "u_tt", "u_x", "u_xx"])
def test_burgers_evaluators_match_difference_quotients(burgers_case, spec):
    a = burgers_case.analytic
    u = a[S["u"]]
    t, x, h = 0.37, 0.61, 1e-4
    fd = {
        "u_t": (u(t + h, x) - u(t - h, x)) / (2 * h),
        "u_tt": (u(t + h, x) - 2 * u(t, x) + u(t - h, x)) / h**2,
        "u_x": (u(t, x + h) - u(t, x - h)) / (2 * h),
        "u_xx": (u(t, x + h) - 2 * u(t, x) + u(t, x - h)) / h**2,
    }[spec]
    assert a[S[spec]](t, x) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_burgers_field_is_not_constant(burgers_case):
    assert np.ptp(burgers_case.field.values) > 0.5


def test_decoy_expressible_in_burgers_pool(burgers_case):
    specs = burgers_case.token_pool.specs
    assert {S["u_x"], S["u_t"], S["u_tt"]} <= specs
    assert burgers_case.token_pool.max_factors >= 2


@pytest.mark.parametrize("name", ["wave", "burgers"])
def test_true_equation_holds_analytically(name):
    case = make_case(name)
    eq = {"wave": equation_from_terms(["u_tt", "u_xx"], [1, -0.04]),
          "burgers": equation_from_terms(["u_t", ("u", "u_x")], [1, 1])}[name]
    assert eval_q_op(eq, case.table("analytic")) <= 1e-8


def test_kdv_true_equation_scheme_limited():
    case = make_case("kdv")
    from pdediscover.representation import canonical_form
    assert canonical_form(kdv_true(), 2)[0] == case.true_equation
    assert eval_q_op(kdv_true(), case.table()) <= 5e-2


def test_kdv_zero_initial_gives_ode_solution():
    g = periodic_x_grid()
    case = gen_kdv(g, np.zeros(g.x_axis.size))
    u = case.field.values
    assert np.ptp(u, axis=1).max() <= 1e-12
    assert abs(u[-1, 0] - math.sin(1.0) ** 2 / 2) <= 1e-4
    assert eval_q_op(kdv_true(), case.table()) <= 1e-3


def test_kdv_soliton_translates():
    length, c = 40.0, 1.0
    g = periodic_x_grid(t_range=(0.0, length / c), nt=81, length=length, nx=256)
    u0 = soliton(g.x_axis, c, length / 2)
    u = integrate_kdv(g, u0, forced=False)
    assert np.abs(u[-1] - u0).max() <= 1e-2


def test_kdv_mass_conserved_unforced():
    g = periodic_x_grid(nt=11)
    log = []
    integrate_kdv(g, 0.5 * np.cos(g.x_axis), forced=False, mass_log=log)
    steps = np.abs(np.diff(log))
    assert steps.max() <= 1e-8


def test_kdv_stability_and_periodicity_checks():
    g = periodic_x_grid(nt=11)
    limit = kdv_dt_limit(g.dx, 1.0)
    with pytest.raises(ConfigurationError, match="stability"):
        integrate_kdv(g, 0.5 * np.cos(g.x_axis), dt=limit * 10)
    with pytest.raises(ConfigurationError, match="periodic"):
        integrate_kdv(g, np.linspace(0, 3, g.x_axis.size))


def test_generators_deterministic():
    for name in CASES:
        a, b = make_case(name, 21, 32), make_case(name, 21, 32)
        assert np.array_equal(a.field.values, b.field.values)


def test_unknown_case():
    with pytest.raises(ConfigurationError):
        make_case("heat")
