"""Uniform space-time grids, scalar fields on them, and CSV serialization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_POINTS = 5
UNIFORMITY_TOL = 1e-12
HEADER_CELL = "t\\x"


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration or input data."""


class FieldFormatError(ConfigurationError):
    pass


def _check_axis(axis: np.ndarray, name: str) -> float:
    if axis.ndim != 1 or axis.size < MIN_POINTS:
        raise ConfigurationError(
            f"{name} axis needs at least {MIN_POINTS} points, got {axis.size}"
        )
    if not np.all(np.isfinite(axis)):
        raise ConfigurationError(f"{name} axis has non-finite coordinates")
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise ConfigurationError(f"{name} axis is not strictly increasing")
    h = (axis[-1] - axis[0]) / (axis.size - 1)
    span = max(abs(axis[0]), abs(axis[-1]), axis[-1] - axis[0])
    dev = np.max(np.abs(steps - h))
    if dev > UNIFORMITY_TOL * span:
        bad = int(np.argmax(np.abs(steps - h)))
        raise ConfigurationError(
            f"non-uniform {name} axis: step {bad} is {steps[bad]!r}, expected {h!r}"
        )
    return float(h)


@dataclass(frozen=True, eq=False)
class Grid:
    t_axis: np.ndarray
    x_axis: np.ndarray
    dt: float
    dx: float

    @classmethod
    def from_axes(cls, t_axis, x_axis) -> "Grid":
        t = np.array(t_axis, dtype=float)
        x = np.array(x_axis, dtype=float)
        dt = _check_axis(t, "time")
        dx = _check_axis(x, "space")
        t.flags.writeable = False
        x.flags.writeable = False
        return cls(t, x, dt, dx)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.t_axis.size, self.x_axis.size)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays ``(T, X)`` of shape ``(nt, nx)``."""
        return np.meshgrid(self.t_axis, self.x_axis, indexing="ij")

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.t_axis, other.t_axis) and np.array_equal(
            self.x_axis, other.x_axis
        )

    __hash__ = object.__hash__


def build_uniform_grid(t_range, x_range, nt: int, nx: int) -> Grid:
    """Grid with ``nt`` x ``nx`` nodes covering both closed ranges."""
    for name, n in (("nt", nt), ("nx", nx)):
        if int(n) != n or n < MIN_POINTS:
            raise ConfigurationError(f"{name}={n} is below the minimum of {MIN_POINTS}")
    for name, (lo, hi) in (("time", t_range), ("space", x_range)):
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise ConfigurationError(f"degenerate {name} range [{lo}, {hi}]")
    return Grid.from_axes(
        np.linspace(t_range[0], t_range[1], int(nt)),
        np.linspace(x_range[0], x_range[1], int(nx)),
    )


@dataclass(frozen=True, eq=False)
class Field:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ConfigurationError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps_field(field: Field) -> str:
    lines = [",".join([HEADER_CELL] + [_fmt(x) for x in field.grid.x_axis])]
    for t, row in zip(field.grid.t_axis, field.values):
        lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def save_field(field: Field, path) -> None:
    Path(path).write_text(dumps_field(field), encoding="utf-8", newline="\n")


def _parse(cell: str, line: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise FieldFormatError(
            f"row {line}, column {col}: non-numeric cell {cell!r}"
        ) from None
    if not math.isfinite(value):
        raise FieldFormatError(f"row {line}, column {col}: non-finite value {cell!r}")
    return value


def load_field(path) -> Field:
    """Read a field CSV. Rows are reported 1-based, header being row 1."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0].strip() != HEADER_CELL:
        raise FieldFormatError(f"{path}: row 1 must start with the cell {HEADER_CELL!r}")
    header = rows[0]
    x = [_parse(c, 1, j + 1) for j, c in enumerate(header[1:], start=1)]
    t, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FieldFormatError(
                f"{path}: row {i} has {len(row)} cells, expected {len(header)}"
            )
        t.append(_parse(row[0], i, 1))
        values.append([_parse(c, i, j + 1) for j, c in enumerate(row[1:], start=1)])
    try:
        grid = Grid.from_axes(t, x)
    except ConfigurationError as exc:
        raise FieldFormatError(f"{path}: {exc}") from None
    return Field(np.array(values), grid)
