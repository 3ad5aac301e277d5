"""Matrix Lax representations of the CLL and KN systems and zero-curvature checks.

Each representation is a triple of matrix polynomials in the spectral
parameter ``lam``::

    U = sum_k lam**(deg_U - k) U_k,   and likewise for V and W,

whose compatibility conditions

    U_y - V_x + [U, V] = 0,     U_t - W_x + [U, W] = 0

hold whenever the potentials solve the corresponding (1+1)-dimensional
system. Representations 1 and 2 take CLL potentials (U row, V column),
representations 3 and 4 take KN potentials (M row, P column). Matrices are
``(N+1) x (N+1)`` with a scalar upper-left block.

Coefficients are returned highest power first and every list has length
``degree + 1``; representation 4 has no constant terms, so its last
coefficients are zero matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import MARGIN, Grid3, VectorPotential, grid_diff
from .errors import BoundaryPointError, BranchMismatchError, DegeneracyError, ValidationError

REPS = (1, 2, 3, 4)
REP_BRANCH = {1: "CLL", 2: "CLL", 3: "KN", 4: "KN"}
# polynomial degrees of (U, V, W) in lam
REP_DEGREES = {1: (1, 2, 3), 2: (2, 4, 6), 3: (1, 2, 3), 4: (2, 4, 6)}


def check_rep(rep: int) -> int:
    if rep not in REPS:
        raise ValidationError(f"Lax representation must be one of {REPS}, got {rep!r}")
    return int(rep)


def _block(a11, a12, a21, a22):
    top = np.concatenate([a11, a12], axis=-1)
    bottom = np.concatenate([a21, a22], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def lax_coefficients(rep: int, row, row_x, row_xx, col, col_x, col_xx):
    """Coefficient matrices of U, V and W for one representation.

    Parameters
    ----------
    rep : int
        Representation id 1-4.
    row, row_x, row_xx : ndarray, shape (..., N)
        First potential components (u or m) and their x-derivatives.
    col, col_x, col_xx : ndarray, shape (..., N)
        Second potential components (v or p) and their x-derivatives.

    Returns
    -------
    (list, list, list)
        Coefficients of U, V, W, highest power of ``lam`` first, each an
        array of shape ``(..., N+1, N+1)``.
    """
    rep = check_rep(rep)
    r, rx, rxx = (np.asarray(a, dtype=float)[..., None, :] for a in (row, row_x, row_xx))
    c, cx, cxx = (np.asarray(a, dtype=float)[..., :, None] for a in (col, col_x, col_xx))
    batch = np.broadcast_shapes(r.shape[:-2], c.shape[:-2])
    n = r.shape[-1]
    r, rx, rxx = (np.broadcast_to(a, batch + (1, n)) for a in (r, rx, rxx))
    c, cx, cxx = (np.broadcast_to(a, batch + (n, 1)) for a in (c, cx, cxx))

    one = np.ones(batch + (1, 1))
    z11 = np.zeros(batch + (1, 1))
    z1n = np.zeros(batch + (1, n))
    zn1 = np.zeros(batch + (n, 1))
    znn = np.zeros(batch + (n, n))
    eye = np.broadcast_to(np.eye(n), batch + (n, n))
    zero = np.zeros(batch + (n + 1, n + 1))

    rc = r @ c            # UV, 1x1
    cr = c @ r            # VU, NxN
    quart = rc @ rc       # A = UVUV (or B = MPMP)
    crcr = cr @ cr
    w_mix = r @ cx - rx @ c   # U V_x - U_x V, 1x1

    if rep == 1:
        U0 = _block(one, z1n, c, -eye)
        U1 = _block(z11, -r, zn1, -0.5 * cr)
        V1 = _block(rc, -2.0 * r, 0.5 * c @ rc - cx, -cr)
        V2 = _block(z11, -0.5 * rc @ r - rx, zn1, -0.25 * crcr + 0.5 * (cx @ r - c @ rx))
        W2 = _block(0.5 * quart - w_mix, -rc @ r - 2.0 * rx,
                    0.25 * c @ quart - 0.5 * c @ w_mix - cx @ rc + cxx,
                    -0.5 * crcr + cx @ r - c @ rx)
        W3 = 0.5 * _block(z11,
                          -0.5 * quart @ r + w_mix @ r - 2.0 * rc @ rx - 2.0 * rxx,
                          zn1,
                          -0.25 * c @ quart @ r + cx @ rc @ r - c @ rc @ rx
                          + 0.5 * c @ w_mix @ r + cx @ rx - cxx @ r - c @ rxx)
        return [U0, U1], [2.0 * U0, V1, V2], [4.0 * U0, 2.0 * V1, W2, W3]

    if rep == 2:
        U0 = _block(-one, z1n, zn1, eye)
        U1 = _block(z11, r, c, znn)
        U2 = _block(z11, z1n, zn1, -0.5 * cr)
        V2 = _block(-rc, z1n, zn1, cr)
        V3 = _block(z11, 0.5 * rc @ r + rx, 0.5 * c @ rc - cx, znn)
        V4 = _block(z11, z1n, zn1, -0.25 * crcr + 0.5 * (cx @ r - c @ rx))
        W4 = _block(-0.5 * quart + w_mix, z1n, zn1, 0.5 * crcr + c @ rx - cx @ r)
        W5 = _block(z11, 0.25 * quart @ r - 0.5 * w_mix @ r + rc @ rx + rxx,
                    0.25 * c @ quart - 0.5 * c @ w_mix - cx @ rc + cxx, znn)
        W6 = 0.5 * _block(z11, z1n, zn1,
                          -0.25 * c @ quart @ r - c @ rxx - cxx @ r + cx @ rx
                          - c @ rc @ rx + cx @ rc @ r + 0.5 * c @ w_mix @ r)
        return ([U0, U1, U2],
                [-2.0 * U0, -2.0 * U1, V2, V3, V4],
                [4.0 * U0, 4.0 * U1, -2.0 * V2, -2.0 * V3, W4, W5, W6])

    if rep == 3:
        U0 = _block(one, z1n, c, -eye)
        U1 = _block(z11, r, zn1, znn)
        V1 = _block(rc, -2.0 * r, c @ rc + cx, -cr)
        V2 = _block(z11, rc @ r - rx, zn1, znn)
        W2 = _block(1.5 * quart + w_mix, -2.0 * rc @ r + 2.0 * rx,
                    1.5 * c @ quart + 1.5 * cx @ rc + 1.5 * c @ r @ cx + cxx,
                    -1.5 * crcr + c @ rx - cx @ r)
        W3 = _block(z11, 1.5 * quart @ r - 1.5 * rx @ c @ r - 1.5 * rc @ rx + rxx, zn1, znn)
        return [U0, U1], [-2.0 * U0, V1, V2], [4.0 * U0, -2.0 * V1, W2, W3]

    U0 = _block(-one, z1n, zn1, eye)
    U1 = _block(z11, r, -c, znn)
    V2 = _block(-rc, z1n, zn1, cr)
    V3 = _block(z11, rc @ r - rx, -c @ rc - cx, znn)
    W4 = _block(-1.5 * quart - w_mix, z1n, zn1, 1.5 * crcr + cx @ r - c @ rx)
    W5 = _block(z11, 1.5 * quart @ r - 1.5 * rc @ rx - 1.5 * rx @ c @ r + rxx,
                -1.5 * c @ quart - 1.5 * cx @ rc - 1.5 * c @ r @ cx - cxx, znn)
    return ([U0, U1, zero],
            [2.0 * U0, 2.0 * U1, V2, V3, zero],
            [4.0 * U0, 4.0 * U1, 2.0 * V2, 2.0 * V3, W4, W5, zero])


def polyval(coefs, lam: float) -> np.ndarray:
    """Horner evaluation of a matrix polynomial given highest power first."""
    out = coefs[0]
    for c in coefs[1:]:
        out = lam * out + c
    return out


@dataclass(frozen=True)
class LaxEval:
    """Pointwise evaluator of one Lax representation with ``N`` components."""

    rep: int
    n: int

    def __post_init__(self):
        check_rep(self.rep)
        if self.n < 1:
            raise ValidationError("N must be at least 1")

    @property
    def branch(self) -> str:
        return REP_BRANCH[self.rep]

    def coefficients(self, row, row_x, row_xx, col, col_x, col_xx):
        return lax_coefficients(self.rep, row, row_x, row_xx, col, col_x, col_xx)

    def __call__(self, lam, row, row_x, row_xx, col, col_x, col_xx):
        cu, cv, cw = self.coefficients(row, row_x, row_xx, col, col_x, col_xx)
        return polyval(cu, lam), polyval(cv, lam), polyval(cw, lam)


@dataclass(frozen=True, eq=False)
class MatrixField:
    """``d x d`` real matrices sampled on a :class:`Grid3`; values shape ``(nt, ny, nx, d, d)``."""

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 5 or values.shape[:3] != self.grid.shape or values.shape[3] != values.shape[4]:
            raise ValidationError(f"matrix field shape {values.shape} does not fit grid {self.grid.shape}")
        bad = ~np.isfinite(values)
        if bad.any():
            it, iy, ix = np.argwhere(bad)[0][:3]
            raise DegeneracyError("non-finite matrix entry", (int(ix), int(iy), int(it)))
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


def _potential_jets(pot: VectorPotential):
    g = pot.grid
    a, b = pot.arrays()
    return (a, grid_diff(a, g, "x", 1), grid_diff(a, g, "x", 2),
            b, grid_diff(b, g, "x", 1), grid_diff(b, g, "x", 2))


def _check_branch(rep: int, pot: VectorPotential):
    if REP_BRANCH[rep] != pot.branch:
        raise BranchMismatchError(
            f"representation {rep} needs {REP_BRANCH[rep]} potentials, got {pot.branch}")


def lax_fields(rep: int, pot: VectorPotential, lam: float):
    """U, V, W sampled on the whole grid, each of shape ``grid.shape + (N+1, N+1)``."""
    rep = check_rep(rep)
    _check_branch(rep, pot)
    return LaxEval(rep, pot.n)(float(lam), *_potential_jets(pot))


def build_lax(rep: int, pot: VectorPotential, lam: float, point) -> tuple:
    """U, V, W of representation ``rep`` at grid index ``point = (ix, iy, it)``.

    Potential x-derivatives come from the grid stencils, so points within the
    boundary margin are rejected.
    """
    rep = check_rep(rep)
    _check_branch(rep, pot)
    ix, iy, it = (int(i) for i in point)
    g = pot.grid
    if not (0 <= ix < g.nx and 0 <= iy < g.ny and 0 <= it < g.nt):
        raise BoundaryPointError(f"point {tuple(point)} is outside the grid")
    if not (MARGIN <= ix < g.nx - MARGIN):
        raise BoundaryPointError(f"point {tuple(point)} lies in the {MARGIN}-cell x-boundary margin")
    jets = [j[it, iy, ix] for j in _potential_jets(pot)]
    return LaxEval(rep, pot.n)(float(lam), *jets)


def zero_curvature_residual(rep: int, pot: VectorPotential, lam: float):
    """Residual fields ``U_y - V_x + [U, V]`` and ``U_t - W_x + [U, W]``."""
    if not np.isfinite(lam):
        raise ValidationError("lam must be finite")
    g = pot.grid
    U, V, W = lax_fields(rep, pot, lam)
    zy = grid_diff(U, g, "y") - grid_diff(V, g, "x") + U @ V - V @ U
    zt = grid_diff(U, g, "t") - grid_diff(W, g, "x") + U @ W - W @ U
    return MatrixField(g, zy), MatrixField(g, zt)
