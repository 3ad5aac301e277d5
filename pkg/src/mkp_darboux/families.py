"""Closed-form solitary waves of the mKP equation and their parameter regions.

Families 1 and 3 have the bell-shaped form::

    q = K sech^2(xi) / ((g1 + g3 tanh xi) (g2 + g4 tanh xi))

and families 2 and 4 the form::

    q = K sech(2 xi) / (g2 sech(2 xi) + g3 tanh(2 xi) - g4)

with ``xi = a x + b y + c t``. All coefficients are real polynomials in the
six parameters (lam1, lam2, alpha1..alpha4).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .calculus import Grid3, ScalarField3
from .errors import SingularPointError, ValidationError

FAMILIES = (1, 2, 3, 4)

# parameters used throughout the tests and documentation
STANDARD_PARAMS = {
    1: ((1.0, 2.0), (1.0, -1.0, 1.0, 1.0)),
    2: ((1.0, 2.0), (1.0, 1.0, 1.0, -1.0)),
    3: ((1.0, 2.0), (1.0, -1.0, 1.0, 1.0)),
    4: ((1.0, 2.0), (1.0, 1.0, 1.0, -1.0)),
}

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class FamilyParams:
    """Family index plus the sextuple (lam1, lam2, alpha1..alpha4)."""

    family: int
    lambdas: tuple
    alphas: tuple

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        lambdas = tuple(float(v) for v in self.lambdas)
        alphas = tuple(float(v) for v in self.alphas)
        if len(lambdas) != 2:
            raise ValidationError(f"expected 2 eigenvalues lam1, lam2, got {len(lambdas)}")
        if len(alphas) != 4:
            raise ValidationError(f"expected 4 amplitudes alpha1..alpha4, got {len(alphas)}")
        for name, v in zip(("lam1", "lam2", "alpha1", "alpha2", "alpha3", "alpha4"), lambdas + alphas):
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
            if v == 0.0:
                raise ValidationError(f"{name} must be nonzero")
        l1, l2 = lambdas
        if abs(l1 - l2) <= 1e-12 * max(abs(l1), abs(l2)):
            raise ValidationError(f"lam1 and lam2 must be distinct, got {l1} and {l2}")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def standard(cls, family: int) -> "FamilyParams":
        if family not in STANDARD_PARAMS:
            raise ValidationError(f"family must be one of {FAMILIES}, got {family!r}")
        lambdas, alphas = STANDARD_PARAMS[family]
        return cls(family, lambdas, alphas)

    def with_family(self, family: int) -> "FamilyParams":
        return FamilyParams(family, self.lambdas, self.alphas)


@dataclass(frozen=True)
class GammaXi:
    """Phase and rational coefficients of one closed-form family.

    ``multiplier`` is 1 when the hyperbolic functions take ``xi`` and 2 when
    they take ``2 xi``.
    """

    family: int
    a: float
    b: float
    c: float
    gammas: tuple
    numerator: float
    multiplier: int

    def xi(self, x, y, t):
        return self.a * np.asarray(x) + self.b * np.asarray(y) + self.c * np.asarray(t)

    @property
    def argument_coefficients(self) -> tuple:
        """Coefficients of x, y, t inside sech/tanh (``multiplier`` included)."""
        m = self.multiplier
        return m * self.a, m * self.b, m * self.c

    @property
    def scale(self) -> float:
        g1, g2, g3, g4 = self.gammas
        if self.family in (1, 3):
            return (abs(g1) + abs(g3)) * (abs(g2) + abs(g4))
        return abs(g2) + abs(g3) + abs(g4)

    def denominator_factors(self, xi):
        """Denominator factors as functions of xi: two for families 1/3, one for 2/4."""
        g1, g2, g3, g4 = self.gammas
        if self.family in (1, 3):
            th = np.tanh(xi)
            return [g1 + g3 * th, g2 + g4 * th]
        X = 2.0 * np.asarray(xi, dtype=float)
        return [g2 * _sech(X) + g3 * np.tanh(X) - g4]

    def denominator(self, xi):
        out = 1.0
        for f in self.denominator_factors(xi):
            out = out * f
        return out

    def q_of_xi(self, xi) -> np.ndarray:
        """Evaluate q as a function of the phase, raising on a vanishing denominator."""
        xi = np.asarray(xi, dtype=float)
        den = self.denominator(xi)
        bad = np.abs(den) < SINGULAR_RTOL * self.scale
        if np.any(bad):
            where = float(np.broadcast_to(xi, np.shape(bad))[bad].flat[0])
            raise SingularPointError(f"family {self.family} denominator vanishes", (where,))
        if self.family in (1, 3):
            top = _sech(xi) ** 2
        else:
            top = _sech(2.0 * xi)
        return self.numerator * top / den


def _sech(X):
    # written with exp(-|X|) so large arguments underflow to 0 instead of overflowing
    e = np.exp(-np.abs(np.asarray(X, dtype=float)))
    return 2.0 * e / (1.0 + e * e)


def build_coefficients(params: FamilyParams) -> GammaXi:
    """Phase coefficients (a, b, c), the four gammas and the numerator constant."""
    i = params.family
    l1, l2 = params.lambdas
    a1, a2, a3, a4 = params.alphas
    prod = a1 * a2 * a3 * a4
    if i in (1, 3):
        s = 1.0 if i == 1 else -1.0
        gammas = (a1 * a4 - a2 * a3,
                  a1 * a4 * l1 - a2 * a3 * l2,
                  a2 * a3 + a1 * a4,
                  a1 * a4 * l1 + a2 * a3 * l2)
        return GammaXi(i, s * (l1 - l2), 2.0 * (l1 ** 2 - l2 ** 2), s * 4.0 * (l1 ** 3 - l2 ** 3),
                       gammas, s * 2.0 * prod * (l1 - l2) ** 2, 1)

    d2 = l1 ** 2 - l2 ** 2
    p23, p14 = (a2 * a3) ** 2, (a1 * a4) ** 2
    g1 = prod * d2
    if i == 2:
        g3 = (p23 - p14) * l1 * l2
        a, c, s = -d2, -4.0 * (l1 ** 6 - l2 ** 6), 1.0
    else:
        g3 = (p14 - p23) * l1 * l2
        a, c, s = d2, 4.0 * (l1 ** 6 - l2 ** 6), -1.0
    gammas = (g1, prod * (l1 ** 2 + l2 ** 2), g3, (p23 + p14) * l1 * l2)
    return GammaXi(i, a, 2.0 * (l1 ** 4 - l2 ** 4), c, gammas, s * 2.0 * g1 * d2, 2)


def closed_form_q(params: FamilyParams, point: Sequence[float]) -> float:
    """Closed-form q at one point ``(x, y, t)``."""
    x, y, t = (float(v) for v in point)
    co = build_coefficients(params)
    try:
        return float(co.q_of_xi(co.xi(x, y, t)))
    except SingularPointError as exc:
        raise SingularPointError(f"family {params.family} denominator vanishes", (x, y, t)) from exc


def closed_form_field(params: FamilyParams, grid: Grid3) -> ScalarField3:
    """Closed-form q sampled on every grid point."""
    co = build_coefficients(params)
    x, y, t = grid.mesh()
    xi = co.xi(x, y, t)
    bad = np.abs(co.denominator(xi)) < SINGULAR_RTOL * co.scale
    if bad.any():
        it, iy, ix = np.argwhere(bad)[0]
        raise SingularPointError(f"family {params.family} denominator vanishes",
                                 (grid.x[ix], grid.y[iy], grid.t[it]))
    return ScalarField3(grid, co.q_of_xi(xi))


def in_stability_region(params: FamilyParams) -> str:
    """Classify the parameters as ``'A'``, ``'B'`` or ``'neither'``."""
    l1, l2 = params.lambdas
    a1, a2, a3, a4 = params.alphas
    same_sign = l1 * l2 > 0
    if params.family in (1, 3):
        if a2 * a3 < 0 and a1 * a4 > 0 and same_sign:
            return "A"
        if a2 * a3 > 0 and a1 * a4 < 0 and same_sign:
            return "B"
        return "neither"
    prod = a1 * a2 * a3 * a4
    if prod < 0 and same_sign:
        return "A"
    if prod > 0 and not same_sign:
        return "B"
    return "neither"


def scan_singularities(params: FamilyParams, xi_range=(-30.0, 30.0), samples: int = 4001,
                       xtol: float = 1e-10) -> list:
    """Real roots of the denominator in ``xi_range``, sorted.

    Each denominator factor is sampled on a uniform ``xi`` grid; sign changes
    are refined by bisection and exact sample zeros are kept as they are.
    Families 1/3 scan their two factors separately so that a double root
    shared by both factors is still found.
    """
    if samples < 100:
        raise ValidationError(f"samples must be at least 100, got {samples}")
    lo, hi = (float(v) for v in xi_range)
    if not hi > lo:
        raise ValidationError("xi_range must be increasing")
    co = build_coefficients(params)
    xs = np.linspace(lo, hi, int(samples))
    roots = []
    for k in range(len(co.denominator_factors(0.0))):
        f = lambda z, k=k: float(co.denominator_factors(z)[k])
        vals = np.array([f(z) for z in xs])
        for j in np.flatnonzero(vals == 0.0):
            roots.append(float(xs[j]))
        for j in np.flatnonzero(vals[:-1] * vals[1:] < 0):
            roots.append(float(bisect(f, xs[j], xs[j + 1], xtol=xtol)))
    roots.sort()
    merged = []
    for r in roots:
        if not merged or r - merged[-1] > 10 * xtol:
            merged.append(r)
    return merged


def sample_in_region(family: int, region: str, rng: np.random.Generator) -> FamilyParams:
    """Random parameters inside region ``'A'`` or ``'B'`` of ``family``.

    Magnitudes are log-uniform in [0.1, 10]; signs are drawn and then forced
    to satisfy the region's sign conditions.
    """
    if region not in ("A", "B"):
        raise ValidationError(f"region must be 'A' or 'B', got {region!r}")
    while True:
        mags = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 6))
        signs = rng.choice([-1.0, 1.0], 6)
        l1, l2, a1, a2, a3, a4 = mags * signs
        if family in (1, 3):
            l2 = np.copysign(l2, l1)
            if region == "A":
                a4, a3 = np.copysign(a4, a1), -np.copysign(a3, a2)
            else:
                a4, a3 = -np.copysign(a4, a1), np.copysign(a3, a2)
        else:
            l2 = np.copysign(l2, l1) if region == "A" else -np.copysign(l2, l1)
            want = -1.0 if region == "A" else 1.0
            if np.sign(a1 * a2 * a3) != want * np.sign(a4):
                a4 = -a4
        if abs(l1 - l2) > 1e-6 * max(abs(l1), abs(l2)) and abs(abs(l1) - abs(l2)) > 1e-6:
            return FamilyParams(family, (l1, l2), (a1, a2, a3, a4))


# decay lengths (in units of the sech/tanh argument) kept on each side of the wave
_HALF_WIDTH = {1: 12.0, 3: 12.0, 2: 24.0, 4: 24.0}


def auto_grid(params: FamilyParams, nx: int = 257, ny: int = 17, nt: int = 9) -> Grid3:
    """A verification grid adapted to the wave's phase velocity.

    The x-window covers the wave out to exp(-24) decay on both sides. The
    y and t spacings are chosen so that one step in y or t moves the phase
    by the same amount as one step in x, which keeps the traveling wave
    resolved in every direction and localized in x on every (y, t) slice.
    """
    A, B, C = (abs(v) for v in build_coefficients(params).argument_coefficients)
    half = _HALF_WIDTH[params.family]
    if A == 0.0:
        raise ValidationError("the wave has no x-dependence; no auto grid exists")
    x_half = half / A
    step = 2.0 * half / (nx - 1)   # phase change per x step
    hy = step / (B if B > 1e-8 * A else A)
    ht = step / (C if C > 1e-8 * A else A)
    y_half = hy * (ny - 1) / 2
    t_half = ht * (nt - 1) / 2
    return Grid3(-x_half, x_half, nx, -y_half, y_half, ny, -t_half, t_half, nt)
