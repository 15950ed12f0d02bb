"""Finite-difference and closed-form derivative tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .grid import ConfigurationError, Field, Grid

TIME, SPACE = "t", "x"
MAX_ORDER = {TIME: 2, SPACE: 3}
_AXIS_INDEX = {TIME: 0, SPACE: 1}


@dataclass(frozen=True, order=True)
class DerivativeSpec:
    axis: str
    order: int

    def __post_init__(self):
        if self.axis not in MAX_ORDER:
            raise ConfigurationError(f"unknown axis {self.axis!r}")
        if self.order < 0 or self.order > MAX_ORDER[self.axis]:
            raise ConfigurationError(
                f"unsupported derivative order {self.order} along {self.axis}"
            )
        if self.order == 0 and self.axis != TIME:
            # the field itself has no axis; normalize so there is one spelling
            object.__setattr__(self, "axis", TIME)

    @property
    def label(self) -> str:
        if self.order == 0:
            return "u"
        return f"u_{self.axis * self.order}"

    def render(self) -> str:
        if self.order == 0:
            return "u"
        if self.order == 1:
            return f"du/d{self.axis}"
        return f"d{self.order}u/d{self.axis}{self.order}"

    @classmethod
    def parse(cls, label: str) -> "DerivativeSpec":
        label = label.strip()
        if label == "u":
            return cls(TIME, 0)
        if label.startswith("u_") and len(set(label[2:])) == 1 and label[2:]:
            return cls(label[2], len(label) - 2)
        raise ConfigurationError(f"cannot parse derivative label {label!r}")


U = DerivativeSpec(TIME, 0)


def stencil_weights(offsets, order: int) -> np.ndarray:
    """Weights ``w`` with ``sum(w * f(offsets)) ~ f^(order)(0)`` on unit spacing."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(vander, rhs)


def _diff_axis0(u: np.ndarray, order: int, h: float) -> np.ndarray:
    n = u.shape[0]
    half = 1 if order <= 2 else 2
    width = order + 2
    if n < width:
        raise ConfigurationError(
            f"order {order} needs at least {width} points along the axis, got {n}"
        )
    out = np.empty_like(u)
    central = stencil_weights(np.arange(-half, half + 1), order)
    # central weights are exactly symmetric/antisymmetric; round off solver noise
    central = np.round(central * 2) / 2
    acc = np.zeros_like(u[half : n - half])
    for k, w in zip(range(-half, half + 1), central):
        if w != 0:
            acc = acc + w * u[half + k : n - half + k]
    out[half : n - half] = acc
    for i in list(range(half)) + list(range(n - half, n)):
        start = 0 if i < half else n - width
        idx = np.arange(start, start + width)
        w = stencil_weights(idx - i, order)
        out[i] = np.tensordot(w, u[idx], axes=1)
    return out / h**order


def finite_diff(field: Field, spec: DerivativeSpec) -> Field:
    """Second-order finite-difference derivative of ``field``.

    Interior nodes use central stencils (5 points for the third derivative),
    boundary nodes use one-sided stencils of ``order + 2`` points.
    """
    if spec.order == 0:
        return field
    axis = _AXIS_INDEX[spec.axis]
    h = field.grid.dt if axis == 0 else field.grid.dx
    u = np.moveaxis(field.values, axis, 0)
    d = _diff_axis0(u, spec.order, h)
    return Field(np.moveaxis(d, 0, axis), field.grid)


@dataclass(frozen=True, eq=False)
class DerivativeTable:
    grid: Grid
    fields: Mapping[DerivativeSpec, np.ndarray]
    interior_mask: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __contains__(self, spec) -> bool:
        return spec in self.fields

    def values(self, spec: DerivativeSpec) -> np.ndarray:
        """Flattened values of ``spec`` restricted to the interior mask."""
        key = ("spec", spec)
        if key not in self._cache:
            if spec not in self.fields:
                raise KeyError(f"{spec.label} is not in the derivative table")
            self._cache[key] = self.fields[spec][self.interior_mask]
        return self._cache[key]

    def coordinate(self, axis: str) -> np.ndarray:
        key = ("coord", axis)
        if key not in self._cache:
            T, X = self.grid.mesh()
            self._cache[key] = (T if axis == TIME else X)[self.interior_mask]
        return self._cache[key]

    @property
    def n_points(self) -> int:
        return int(self.interior_mask.sum())

    @property
    def field(self) -> Field:
        return Field(self.fields[U], self.grid)


def interior_mask(grid: Grid, specs) -> np.ndarray:
    margins = {TIME: 0, SPACE: 0}
    for s in specs:
        if s.order > 0:
            margins[s.axis] = max(margins[s.axis], s.order + 1)
    nt, nx = grid.shape
    mt, mx = margins[TIME], margins[SPACE]
    if 2 * mt >= nt or 2 * mx >= nx:
        raise ConfigurationError("grid too small: interior mask would be empty")
    mask = np.zeros(grid.shape, dtype=bool)
    mask[mt : nt - mt, mx : nx - mx] = True
    return mask


def build_table(field: Field, specs) -> DerivativeTable:
    specs = sorted(set(specs))
    if not specs:
        raise ConfigurationError("at least one derivative spec is required")
    specs = sorted(set(specs) | {U})
    fields = {s: finite_diff(field, s).values for s in specs}
    return DerivativeTable(field.grid, fields, interior_mask(field.grid, specs))


def analytic_table(
    formulas: Mapping[DerivativeSpec, Callable[[np.ndarray, np.ndarray], np.ndarray]],
    grid: Grid,
    specs=None,
) -> DerivativeTable:
    """Table filled from closed-form evaluators ``f(t, x)``; mask is the full grid."""
    specs = set(formulas if specs is None else specs) | {U}
    missing = [s.label for s in sorted(specs) if s not in formulas]
    if missing:
        raise ConfigurationError(f"no closed-form evaluator for {', '.join(missing)}")
    T, X = grid.mesh()
    fields = {}
    for s in sorted(specs):
        v = np.broadcast_to(np.asarray(formulas[s](T, X), dtype=float), grid.shape).copy()
        v.flags.writeable = False
        fields[s] = v
    return DerivativeTable(grid, fields, np.ones(grid.shape, dtype=bool))
