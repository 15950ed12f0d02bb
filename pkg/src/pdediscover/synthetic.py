"""Benchmark datasets: wave, inviscid Burgers and forced KdV."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .derivatives import (SPACE, TIME, U, DerivativeSpec, DerivativeTable,
                          analytic_table, build_table)
from .grid import ConfigurationError, Field, Grid, build_uniform_grid
from .representation import (Parametric, ParametricFamily, TokenPool, canonical_form,
                             equation_from_terms, term)

CASES = ("wave", "burgers", "kdv")
U_T, U_TT = DerivativeSpec(TIME, 1), DerivativeSpec(TIME, 2)
U_X, U_XX, U_XXX = (DerivativeSpec(SPACE, k) for k in (1, 2, 3))

# wave: standing modes a*sin(k*pi*x)*cos(c*k*pi*t) with c**2 = 0.04
WAVE_SPEED = 0.2
WAVE_MODES = ((1.0, 1), (0.5, 2))
# burgers: characteristics from u(0, x) = x + a*x**2
BURGERS_CURVATURE = 0.5

KDV_NONLINEAR = 6.0
KDV_DEFAULT_NX = 128


@dataclass(frozen=True, eq=False)
class BenchmarkCase:
    name: str
    grid: Grid
    field: Field
    analytic: Mapping[DerivativeSpec, Callable] | None
    true_equation: str
    token_pool: TokenPool
    derivative_method: str = "numeric"

    def table(self, method: str | None = None, specs=None) -> DerivativeTable:
        method = method or self.derivative_method
        specs = set(specs or self.token_pool.specs)
        if method == "analytic":
            if self.analytic is None:
                raise ConfigurationError(f"{self.name} has no closed-form derivatives")
            return analytic_table(self.analytic, self.grid, specs)
        if method == "numeric":
            return build_table(self.field, specs)
        raise ConfigurationError(f"unknown derivative method {method!r}")


def default_pool(name: str, **overrides) -> TokenPool:
    if name == "kdv":
        base = dict(derivatives=(U, U_T, U_X, U_XX, U_XXX),
                    parametric=(ParametricFamily("sin", TIME), ParametricFamily("cos", TIME)))
    elif name in ("wave", "burgers"):
        base = dict(derivatives=(U, U_T, U_TT, U_X, U_XX))
    else:
        raise ConfigurationError(f"unknown benchmark {name!r}")
    base.update(overrides)
    return TokenPool(**base)


def _true(terms, weights) -> str:
    return canonical_form(equation_from_terms(terms, weights), digits=2)[0]


# -- wave ---------------------------------------------------------------------

def _wave_eval(t_order: int, x_order: int):
    def f(T, X):
        out = np.zeros(np.broadcast(T, X).shape)
        for amp, k in WAVE_MODES:
            kx, kt = k * math.pi, WAVE_SPEED * k * math.pi
            out += (amp * kx**x_order * np.sin(kx * X + x_order * math.pi / 2)
                    * kt**t_order * np.cos(kt * T + t_order * math.pi / 2))
        return out
    return f


def gen_wave(grid: Grid | None = None) -> BenchmarkCase:
    grid = grid or build_uniform_grid((0, 1), (0, 1), 101, 101)
    analytic = {U: _wave_eval(0, 0), U_T: _wave_eval(1, 0), U_TT: _wave_eval(2, 0),
                U_X: _wave_eval(0, 1), U_XX: _wave_eval(0, 2), U_XXX: _wave_eval(0, 3)}
    T, X = grid.mesh()
    return BenchmarkCase(
        "wave", grid, Field(analytic[U](T, X), grid), analytic,
        _true(["u_tt", "u_xx"], [1.0, -WAVE_SPEED**2]), default_pool("wave"), "analytic",
    )


# -- burgers ------------------------------------------------------------------

def _burgers_parts(T, X, a=BURGERS_CURVATURE):
    # foot of the characteristic through (t, x): x = xi + t*u0(xi)
    xi = 2 * X / ((1 + T) + np.sqrt((1 + T) ** 2 + 4 * a * T * X))
    u = xi + a * xi**2
    slope = 1 + 2 * a * xi
    denom = 1 + T * slope
    return u, slope / denom, 2 * a / denom**3


def _burgers_u(T, X):
    return _burgers_parts(T, X)[0]


def _burgers_ux(T, X):
    return _burgers_parts(T, X)[1]


def _burgers_uxx(T, X):
    return _burgers_parts(T, X)[2]


def _burgers_ut(T, X):
    u, ux, _ = _burgers_parts(T, X)
    return -u * ux


def _burgers_utt(T, X):
    u, ux, uxx = _burgers_parts(T, X)
    return 2 * u * ux**2 + u**2 * uxx


def gen_burgers(grid: Grid | None = None) -> BenchmarkCase:
    """Smooth inviscid Burgers field from the quadratic profile ``u(0,x) = x + x^2/2``."""
    grid = grid or build_uniform_grid((0, 1), (0, 1), 101, 101)
    if grid.t_axis[0] < 0 or grid.x_axis[0] < 0:
        raise ConfigurationError("burgers benchmark needs t >= 0 and x >= 0")
    analytic = {U: _burgers_u, U_T: _burgers_ut, U_TT: _burgers_utt,
                U_X: _burgers_ux, U_XX: _burgers_uxx}
    T, X = grid.mesh()
    return BenchmarkCase(
        "burgers", grid, Field(_burgers_u(T, X), grid), analytic,
        _true(["u_t", ("u", "u_x")], [1.0, 1.0]), default_pool("burgers"), "analytic",
    )


# -- KdV ----------------------------------------------------------------------

def kdv_forcing(t):
    return math.cos(t) * math.sin(t)


def kdv_dt_limit(dx: float, umax: float) -> float:
    """Largest stable leapfrog step for the Zabusky-Kruskal scheme."""
    return 1.0 / (KDV_NONLINEAR * umax / dx + 3 * math.sqrt(3) / (2 * dx**3))


def _kdv_rhs(u, t, dx, forcing):
    ext = np.concatenate((u[-2:], u, u[:2]))
    um2, um1, up1, up2 = ext[:-4], ext[1:-3], ext[3:-1], ext[4:]
    adv = KDV_NONLINEAR * (up1 + u + um1) / 3 * (up1 - um1) / (2 * dx)
    disp = (up2 - 2 * up1 + 2 * um1 - um2) / (2 * dx**3)
    out = -adv - disp
    if forcing is not None:
        out = out + forcing(t)
    return out


def periodic_x_grid(t_range=(0.0, 1.0), nt=101, length=2 * math.pi, nx=KDV_DEFAULT_NX) -> Grid:
    return build_uniform_grid(t_range, (0.0, length * (1 - 1 / nx)), nt, nx)


def check_periodic(u0: np.ndarray) -> None:
    steps = np.abs(np.diff(u0))
    wrap = abs(u0[0] - u0[-1])
    scale = max(float(np.max(np.abs(u0))), 1e-300)
    if wrap > 2 * float(steps.max()) + 1e-12 * scale:
        raise ConfigurationError(
            f"initial data is not periodic: wrap-around jump {wrap:.3g} exceeds "
            f"twice the largest interior step {steps.max():.3g}"
        )


def integrate_kdv(grid: Grid, initial, forced: bool = True, dt: float | None = None,
                  mass_log: list | None = None) -> np.ndarray:
    """Leapfrog integration sampled at the grid times; returns values (nt, nx)."""
    u0 = np.array(initial, dtype=float).ravel()
    if u0.shape != (grid.x_axis.size,):
        raise ConfigurationError("initial profile must have one value per x node")
    check_periodic(u0)
    forcing = kdv_forcing if forced else None
    t_axis = grid.t_axis
    horizon = t_axis[-1] - t_axis[0]
    umax = float(np.max(np.abs(u0))) + (0.5 * horizon if forced else 0.0)
    limit = kdv_dt_limit(grid.dx, max(umax, 1e-12))
    if dt is None:
        dt = 0.9 * limit
    elif dt > limit:
        raise ConfigurationError(f"time step {dt:.3g} exceeds the stability limit {limit:.3g}")
    substeps = max(1, math.ceil(grid.dt / dt - 1e-9))
    h = grid.dt / substeps
    out = np.empty((t_axis.size, u0.size))
    out[0] = u0
    prev, cur = None, u0
    step = 0
    for n in range(1, t_axis.size):
        for _ in range(substeps):
            tn = t_axis[0] + step * h
            if prev is None:
                nxt = cur + h * _kdv_rhs(cur, tn, grid.dx, forcing)
            else:
                nxt = prev + 2 * h * _kdv_rhs(cur, tn, grid.dx, forcing)
            prev, cur = cur, nxt
            step += 1
            if mass_log is not None:
                mass_log.append(float(cur.sum() * grid.dx))
        if not np.all(np.isfinite(cur)):
            raise RuntimeError(f"KdV integration blew up before t={t_axis[n]:.4g}")
        out[n] = cur
    return out


def default_kdv_initial(x: np.ndarray) -> np.ndarray:
    return 0.5 * np.cos(x)


def soliton(x, c=1.0, x0=0.0):
    return 0.5 * c / np.cosh(0.5 * math.sqrt(c) * (x - x0)) ** 2


def gen_kdv(grid: Grid | None = None, initial=None, forced: bool = True,
            dt: float | None = None) -> BenchmarkCase:
    grid = grid or periodic_x_grid()
    if initial is None:
        initial = default_kdv_initial(grid.x_axis)
    values = integrate_kdv(grid, initial, forced, dt)
    pool = default_pool("kdv")
    if forced:
        cos_t = Parametric("cos", TIME, 1.0)
        sin_t = Parametric("sin", TIME, 1.0)
        true = _true(["u_t", ("u", "u_x"), "u_xxx", term(cos_t, sin_t)],
                     [1.0, KDV_NONLINEAR, 1.0, -1.0])
    else:
        true = _true(["u_t", ("u", "u_x"), "u_xxx"], [1.0, KDV_NONLINEAR, 1.0])
    return BenchmarkCase("kdv", grid, Field(values, grid), None, true, pool, "numeric")


def make_case(name: str, nt: int | None = None, nx: int | None = None) -> BenchmarkCase:
    if name == "wave":
        return gen_wave(build_uniform_grid((0, 1), (0, 1), nt or 101, nx or 101))
    if name == "burgers":
        return gen_burgers(build_uniform_grid((0, 1), (0, 1), nt or 101, nx or 101))
    if name == "kdv":
        return gen_kdv(periodic_x_grid(nt=nt or 101, nx=nx or KDV_DEFAULT_NX))
    raise ConfigurationError(f"unknown benchmark {name!r}; choose from {', '.join(CASES)}")
