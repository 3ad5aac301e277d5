"""Uniform (x, y, t) grids, finite differences and residual operators.

Field values are stored as dense ``float64`` arrays of shape ``(nt, ny, nx)``
so that x is the fastest-varying index. All derivatives are second order:
central stencils in the interior, one-sided second-order stencils on the
boundary. Residual maxima are taken over the interior, excluding a margin
of ``MARGIN`` cells on every axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import BranchMismatchError, DegeneracyError, DimensionError, ValidationError

MARGIN = 2

# storage axis of each coordinate in a (nt, ny, nx) array
AXIS_INDEX = {"t": 0, "y": 1, "x": 2}

BRANCHES = ("CLL", "KN")


@dataclass(frozen=True)
class Grid3:
    """Uniform tensor-product grid over (x, y, t)."""

    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int
    t_min: float
    t_max: float
    nt: int

    def __post_init__(self):
        for name in ("x", "y", "t"):
            lo, hi, n = self._axis_spec(name)
            if int(n) != n or n < 1:
                raise ValidationError(f"grid: n{name} must be a positive integer, got {n!r}")
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValidationError(f"grid: {name} endpoints must be finite")
            if n > 1 and not hi > lo:
                raise ValidationError(f"grid: {name}_max must exceed {name}_min (got {lo}, {hi})")

    @classmethod
    def from_axes(cls, x: Sequence, y: Sequence, t: Sequence) -> "Grid3":
        """Build from ``(min, max, count)`` triples."""
        return cls(float(x[0]), float(x[1]), int(x[2]),
                   float(y[0]), float(y[1]), int(y[2]),
                   float(t[0]), float(t[1]), int(t[2]))

    def _axis_spec(self, name):
        return getattr(self, f"{name}_min"), getattr(self, f"{name}_max"), getattr(self, f"n{name}")

    def axis(self, name: str) -> np.ndarray:
        lo, hi, n = self._axis_spec(name)
        if n == 1:
            return np.array([float(lo)])
        return np.linspace(lo, hi, n)

    @property
    def x(self) -> np.ndarray:
        return self.axis("x")

    @property
    def y(self) -> np.ndarray:
        return self.axis("y")

    @property
    def t(self) -> np.ndarray:
        return self.axis("t")

    def spacing(self, name: str) -> float:
        lo, hi, n = self._axis_spec(name)
        return (hi - lo) / (n - 1) if n > 1 else 0.0

    @property
    def shape(self) -> tuple:
        return (self.nt, self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny * self.nt

    def mesh(self):
        """Return broadcast coordinate arrays ``(X, Y, T)`` of shape ``(nt, ny, nx)``."""
        t, y, x = np.meshgrid(self.t, self.y, self.x, indexing="ij")
        return x, y, t

    def refined(self, k: int = 1) -> "Grid3":
        """Halve every spacing ``k`` times, keeping the endpoints."""
        g = self
        for _ in range(k):
            g = Grid3(g.x_min, g.x_max, 2 * (g.nx - 1) + 1,
                      g.y_min, g.y_max, 2 * (g.ny - 1) + 1,
                      g.t_min, g.t_max, 2 * (g.nt - 1) + 1)
        return g

    def interior(self, margin: int = MARGIN) -> tuple:
        """Slices selecting points at least ``margin`` cells from every boundary."""
        return tuple(slice(margin, n - margin) for n in self.shape)

    def in_margin(self, ix: int, iy: int, it: int, margin: int = MARGIN) -> bool:
        return not (margin <= ix < self.nx - margin and margin <= iy < self.ny - margin
                    and margin <= it < self.nt - margin)

    def to_dict(self) -> dict:
        return {name: [float(lo), float(hi), int(n)]
                for name in ("x", "y", "t")
                for lo, hi, n in [self._axis_spec(name)]}


@dataclass(frozen=True, eq=False)
class ScalarField3:
    """A real function sampled on a :class:`Grid3`."""

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            if values.size != self.grid.size:
                raise ValidationError(
                    f"field has {values.size} values, grid needs {self.grid.size}")
            values = values.reshape(self.grid.shape)
        bad = ~np.isfinite(values)
        if bad.any():
            it, iy, ix = np.argwhere(bad)[0]
            raise DegeneracyError("non-finite field value", (int(ix), int(iy), int(it)))
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid3, fn) -> "ScalarField3":
        x, y, t = grid.mesh()
        return cls(grid, np.broadcast_to(fn(x, y, t), grid.shape))

    @classmethod
    def constant(cls, grid: Grid3, c: float = 0.0) -> "ScalarField3":
        return cls(grid, np.full(grid.shape, float(c)))

    def at(self, ix: int, iy: int, it: int) -> float:
        return float(self.values[it, iy, ix])

    def _combine(self, other, op):
        if isinstance(other, ScalarField3):
            if other.grid != self.grid:
                raise ValidationError("fields live on different grids")
            other = other.values
        return ScalarField3(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField3(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class VectorPotential:
    """The N potential pairs of one branch: (u_j, v_j) for CLL or (m_j, p_j) for KN.

    ``first`` holds the row components (u or m), ``second`` the column
    components (v or p).
    """

    first: tuple
    second: tuple
    branch: str

    def __post_init__(self):
        first, second = tuple(self.first), tuple(self.second)
        if self.branch not in BRANCHES:
            raise ValidationError(f"unknown branch {self.branch!r}")
        if len(first) == 0:
            raise ValidationError("a potential needs N >= 1 component pairs")
        if len(first) != len(second):
            raise ValidationError("first/second component counts differ")
        grid = first[0].grid
        if any(f.grid != grid for f in first + second):
            raise ValidationError("all potential components must share one grid")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "second", second)

    @classmethod
    def vacuum(cls, grid: Grid3, n: int = 1, branch: str = "CLL") -> "VectorPotential":
        zero = ScalarField3.constant(grid, 0.0)
        return cls((zero,) * n, (zero,) * n, branch)

    @classmethod
    def from_arrays(cls, grid: Grid3, first: np.ndarray, second: np.ndarray, branch: str):
        """Build from arrays of shape ``grid.shape + (N,)``."""
        first = np.asarray(first, dtype=float)
        second = np.asarray(second, dtype=float)
        n = first.shape[-1]
        return cls(tuple(ScalarField3(grid, first[..., j]) for j in range(n)),
                   tuple(ScalarField3(grid, second[..., j]) for j in range(n)), branch)

    @property
    def grid(self) -> Grid3:
        return self.first[0].grid

    @property
    def n(self) -> int:
        return len(self.first)

    def arrays(self):
        """Component values stacked on a trailing axis: two arrays ``(nt, ny, nx, N)``."""
        return (np.stack([f.values for f in self.first], axis=-1),
                np.stack([f.values for f in self.second], axis=-1))


# --------------------------------------------------------------------------
# array-level stencils

def _check_axis_length(n: int, order: int, name: str):
    if n < order + 2:
        raise DimensionError(
            f"axis {name} has {n} points; order-{order} derivative needs at least {order + 2}")


def diff_array(values: np.ndarray, h: float, axis: int, order: int) -> np.ndarray:
    """Second-order derivative of ``values`` along ``axis`` with uniform spacing ``h``.

    Every stencil is written in terms of differences of samples, so constant
    data differentiates to exactly zero.
    """
    if order not in (1, 2, 3):
        raise ValidationError(f"derivative order must be 1, 2 or 3, got {order}")
    values = np.asarray(values, dtype=float)
    _check_axis_length(values.shape[axis], order, f"#{axis}")
    f = np.moveaxis(values, axis, -1)
    out = np.empty_like(f)

    def edge(w, c):
        # one-sided stencil sum_k c[k] w[k] with sum(c) == 0, in difference form
        return sum(ck * (w[..., k] - w[..., 0]) for k, ck in enumerate(c) if k)

    if order == 1:
        c = (-3.0, 4.0, -1.0)
        out[..., 1:-1] = 0.5 * (f[..., 2:] - f[..., :-2])
        out[..., 0] = 0.5 * edge(f[..., :3], c)
        out[..., -1] = -0.5 * edge(f[..., ::-1][..., :3], c)
        out /= h
    elif order == 2:
        c = (2.0, -5.0, 4.0, -1.0)
        out[..., 1:-1] = (f[..., 2:] - f[..., 1:-1]) - (f[..., 1:-1] - f[..., :-2])
        out[..., 0] = edge(f[..., :4], c)
        out[..., -1] = edge(f[..., ::-1][..., :4], c)
        out /= h * h
    else:
        # 5-point central third derivative; one-sided 5-point stencils on two cells per edge
        c = (-5.0, 18.0, -24.0, 14.0, -3.0)
        out[..., 2:-2] = 0.5 * ((f[..., 4:] - f[..., :-4]) - 2.0 * (f[..., 3:-1] - f[..., 1:-3]))
        rev = f[..., ::-1]
        for i in (0, 1):
            out[..., i] = 0.5 * edge(f[..., i:i + 5], c)
            out[..., -1 - i] = -0.5 * edge(rev[..., i:i + 5], c)
        out /= h ** 3
    return np.moveaxis(out, -1, axis)


def grid_diff(values: np.ndarray, grid: Grid3, axis: str, order: int = 1) -> np.ndarray:
    """:func:`diff_array` for arrays whose leading three axes are ``grid.shape``.

    Trailing axes (vector components, matrix entries) are differentiated
    entrywise.
    """
    if axis not in AXIS_INDEX:
        raise ValidationError(f"axis must be one of x, y, t, got {axis!r}")
    n = getattr(grid, f"n{axis}")
    _check_axis_length(n, order, axis)
    return diff_array(values, grid.spacing(axis), AXIS_INDEX[axis], order)


def diff(f: ScalarField3, axis: str, order: int = 1) -> ScalarField3:
    """Finite-difference derivative of ``f`` along ``axis`` (``'x'``, ``'y'`` or ``'t'``)."""
    return ScalarField3(f.grid, grid_diff(f.values, f.grid, axis, order))


def antiderivative_x_array(values: np.ndarray, grid: Grid3) -> np.ndarray:
    if grid.nx < 2:
        raise DimensionError("antiderivative along x needs at least 2 points")
    return cumulative_trapezoid(values, dx=grid.spacing("x"), axis=AXIS_INDEX["x"], initial=0.0)


def antiderivative_x(f: ScalarField3) -> ScalarField3:
    """Cumulative trapezoidal integral along x, zero at ``x_min`` on every (y, t) slice."""
    return ScalarField3(f.grid, antiderivative_x_array(f.values, f.grid))


def interior_max(fields, margin: int = MARGIN) -> float:
    """Largest absolute value over the interior of one field, a matrix field or a list of them."""
    if isinstance(fields, (list, tuple)):
        return max(interior_max(f, margin) for f in fields)
    sl = fields.grid.interior(margin)
    vals = fields.values[sl + (Ellipsis,)]
    return float(np.max(np.abs(vals))) if vals.size else 0.0


# --------------------------------------------------------------------------
# residual operators

def mkp_residual(q: ScalarField3) -> ScalarField3:
    """Residual of q_t = (q_xxx - 6 q^2 q_x - 6 q_x d^{-1} q_y + 3 d^{-1} q_yy) / 4.

    ``d^{-1}`` is the left-anchored :func:`antiderivative_x`, so ``q`` must
    decay toward ``x_min`` on every (y, t) slice for the residual to vanish.
    """
    g, v = q.grid, q.values
    q_t = grid_diff(v, g, "t", 1)
    q_x = grid_diff(v, g, "x", 1)
    q_xxx = grid_diff(v, g, "x", 3)
    inv_qy = antiderivative_x_array(grid_diff(v, g, "y", 1), g)
    inv_qyy = antiderivative_x_array(grid_diff(v, g, "y", 2), g)
    rhs = 0.25 * (q_xxx - 6.0 * v * v * q_x - 6.0 * q_x * inv_qy + 3.0 * inv_qyy)
    return ScalarField3(g, q_t - rhs)


SYSTEMS = {"CLL": "CLL", "CLL_HO": "CLL", "KN": "KN", "KN_HO": "KN"}


def coupled_system_residual(which: str, pot: VectorPotential) -> list:
    """Left-hand sides of the 2N-coupled CLL / KN systems and their high-order flows.

    Returns ``[r(first_1), ..., r(first_N), r(second_1), ..., r(second_N)]``.
    """
    if which not in SYSTEMS:
        raise ValidationError(f"unknown system {which!r}; expected one of {sorted(SYSTEMS)}")
    if SYSTEMS[which] != pot.branch:
        raise BranchMismatchError(f"{which} needs a {SYSTEMS[which]} potential, got {pot.branch}")
    g = pot.grid
    a, b = pot.arrays()
    d = lambda f, axis, order=1: grid_diff(f, g, axis, order)
    a_x, b_x = d(a, "x"), d(b, "x")
    s = np.sum(a * b, axis=-1, keepdims=True)

    if which == "CLL":
        ra = d(a, "y") - d(a, "x", 2) - s * a_x
        rb = d(b, "y") + d(b, "x", 2) - s * b_x
    elif which == "CLL_HO":
        ax_b = np.sum(a_x * b, axis=-1, keepdims=True)
        bx_a = np.sum(b_x * a, axis=-1, keepdims=True)
        ra = (d(a, "t") - d(a, "x", 3) - 1.5 * s * d(a, "x", 2)
              - 0.75 * (s * s + 2.0 * ax_b) * a_x)
        rb = (d(b, "t") - d(b, "x", 3) + 1.5 * s * d(b, "x", 2)
              - 0.75 * (s * s - 2.0 * bx_a) * b_x)
    elif which == "KN":
        ra = d(a, "y") + d(a, "x", 2) - d(s * a, "x")
        rb = d(b, "y") - d(b, "x", 2) - d(s * b, "x")
    else:
        ax_b = np.sum(a_x * b, axis=-1, keepdims=True)
        bx_a = np.sum(b_x * a, axis=-1, keepdims=True)
        ra = d(a, "t") - d(a, "x", 3) - 1.5 * d(s * s * a - s * a_x - ax_b * a, "x")
        rb = d(b, "t") - d(b, "x", 3) - 1.5 * d(s * s * b + s * b_x + bx_a * b, "x")

    n = pot.n
    return ([ScalarField3(g, ra[..., j]) for j in range(n)]
            + [ScalarField3(g, rb[..., j]) for j in range(n)])


def constrained_potential(pot: VectorPotential) -> ScalarField3:
    """q = -1/2 sum_j first_j * second_j (the same constraint for both branches)."""
    a, b = pot.arrays()
    return ScalarField3(pot.grid, -0.5 * np.sum(a * b, axis=-1))


def stack_fields(fields: Iterable[ScalarField3]) -> np.ndarray:
    return np.stack([f.values for f in fields], axis=-1)
