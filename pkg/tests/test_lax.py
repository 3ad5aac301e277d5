import numpy as np
import pytest

from mkp_darboux import (BoundaryPointError, BranchMismatchError, Grid3, LaxEval, ValidationError,
                         VectorPotential, build_lax, pipeline_potentials, zero_curvature_residual)
from mkp_darboux.calculus import interior_max
from mkp_darboux.darboux import SeedSpec
from mkp_darboux.lax import REP_BRANCH, REP_DEGREES, lax_coefficients
from mkp_darboux.verify import DEFAULT_TOLERANCES, convergence_check

U0_REP1 = np.diag([1.0, -1.0])


def random_jets(rng, n, batch=(6,)):
    return [rng.normal(size=batch + (n,)) for _ in range(6)]


def vacuum_center(rep, n=1):
    g = Grid3(-1.0, 1.0, 9, 0.0, 1.0, 5, 0.0, 1.0, 5)
    return VectorPotential.vacuum(g, n, REP_BRANCH[rep]), (4, 2, 2)


# --------------------------------------------------------------------------
# vacuum values

def test_rep1_vacuum_lambda_3():
    pot, point = vacuum_center(1)
    U, V, W = build_lax(1, pot, 3.0, point)
    np.testing.assert_array_equal(U, 3.0 * U0_REP1)
    np.testing.assert_array_equal(V, 18.0 * U0_REP1)
    np.testing.assert_array_equal(W, 108.0 * U0_REP1)


def test_rep2_vacuum_lambda_2():
    pot, point = vacuum_center(2)
    U, V, W = build_lax(2, pot, 2.0, point)
    np.testing.assert_array_equal(U, np.diag([-4.0, 4.0]))
    np.testing.assert_array_equal(V, np.diag([32.0, -32.0]))
    np.testing.assert_array_equal(W, np.diag([-256.0, 256.0]))


def test_rep4_u0_block():
    zeros = [np.zeros(3)] * 6
    cu, _, _ = lax_coefficients(4, *zeros)
    np.testing.assert_array_equal(cu[0], np.diag([-1.0, 1.0, 1.0, 1.0]))


@pytest.mark.parametrize("rep", [1, 2, 3, 4])
def test_degrees(rep, rng):
    cu, cv, cw = lax_coefficients(rep, *random_jets(rng, 2))
    assert (len(cu) - 1, len(cv) - 1, len(cw) - 1) == REP_DEGREES[rep]
    assert all(c.shape == (6, 3, 3) for c in cu + cv + cw)


# --------------------------------------------------------------------------
# coefficient identities on random potentials

IDENTITIES = {
    1: [("V", 0, 2.0, "U", 0), ("W", 0, 4.0, "U", 0), ("W", 1, 2.0, "V", 1)],
    2: [("V", 0, -2.0, "U", 0), ("W", 0, 4.0, "U", 0), ("V", 1, -2.0, "U", 1),
        ("W", 1, 4.0, "U", 1), ("W", 2, -2.0, "V", 2), ("W", 3, -2.0, "V", 3)],
    3: [("V", 0, -2.0, "U", 0), ("W", 0, 4.0, "U", 0), ("W", 1, -2.0, "V", 1)],
    4: [("V", 0, 2.0, "U", 0), ("W", 0, 4.0, "U", 0), ("V", 1, 2.0, "U", 1),
        ("W", 1, 4.0, "U", 1), ("W", 2, 2.0, "V", 2), ("W", 3, 2.0, "V", 3)],
}


@pytest.mark.parametrize("n", [1, 3])
@pytest.mark.parametrize("rep", [1, 2, 3, 4])
def test_coefficient_identities_are_exact(rep, n, rng):
    cu, cv, cw = lax_coefficients(rep, *random_jets(rng, n))
    coefs = {"U": cu, "V": cv, "W": cw}
    for lhs, i, factor, rhs, j in IDENTITIES[rep]:
        np.testing.assert_array_equal(coefs[lhs][i], factor * coefs[rhs][j])


def test_rep4_has_no_constant_terms(rng):
    cu, cv, cw = lax_coefficients(4, *random_jets(rng, 2))
    for coefs in (cu, cv, cw):
        assert np.all(coefs[-1] == 0.0)


@pytest.mark.parametrize("n", [1, 2])
def test_rep2_block_sparsity(n, rng):
    cu, cv, _ = lax_coefficients(2, *random_jets(rng, n))
    for m in (cu[2], cv[4]):
        assert np.all(m[..., 0, :] == 0.0)
        assert np.all(m[..., :, 0] == 0.0)
        assert np.any(m[..., 1:, 1:] != 0.0)


@pytest.mark.parametrize("rep", [1, 3])
def test_u_is_affine_in_lambda(rep, rng):
    ev = LaxEval(rep, 2)
    jets = random_jets(rng, 2)
    lam = 1.3
    U1, _, _ = ev(lam, *jets)
    U2, _, _ = ev(2.0 * lam, *jets)
    cu, _, _ = ev.coefficients(*jets)
    np.testing.assert_allclose(U2 - U1, lam * cu[0], rtol=0, atol=1e-14)


def test_lax_eval_validates():
    with pytest.raises(ValidationError):
        LaxEval(5, 1)
    with pytest.raises(ValidationError):
        LaxEval(1, 0)


# --------------------------------------------------------------------------
# build_lax errors

def test_build_lax_branch_mismatch():
    pot, point = vacuum_center(1)
    with pytest.raises(BranchMismatchError):
        build_lax(3, pot, 1.0, point)


@pytest.mark.parametrize("point", [(0, 2, 2), (1, 2, 2), (7, 2, 2), (8, 2, 2), (9, 2, 2), (4, 5, 0)])
def test_build_lax_rejects_margin_and_outside(point):
    pot, _ = vacuum_center(1)
    with pytest.raises(BoundaryPointError):
        build_lax(1, pot, 1.0, point)


# --------------------------------------------------------------------------
# zero curvature

@pytest.mark.parametrize("rep", [1, 2, 3, 4])
@pytest.mark.parametrize("lam", [0.7, 2.0, -1.5])
def test_zero_curvature_vanishes_on_vacuum(rep, lam):
    g = Grid3(-2.0, 2.0, 9, 0.0, 1.0, 5, 0.0, 1.0, 5)
    for z in zero_curvature_residual(rep, VectorPotential.vacuum(g, 2, REP_BRANCH[rep]), lam):
        assert np.all(z.values == 0.0)


def test_zero_curvature_flags_non_solution():
    g = Grid3(-10.0, 10.0, 201, -1.0, 1.0, 9, -1.0, 1.0, 9)
    x, _, _ = g.mesh()
    sech = (1.0 / np.cosh(x))[..., None]
    zy, _ = zero_curvature_residual(1, VectorPotential.from_arrays(g, sech, sech, "CLL"), 1.0)
    assert interior_max(zy) > 0.1


def test_zero_curvature_rejects_nonfinite_lambda():
    pot, _ = vacuum_center(1)
    with pytest.raises(ValidationError):
        zero_curvature_residual(1, pot, float("nan"))


@pytest.mark.parametrize("family", [1, 2, 3, 4])
def test_zero_curvature_converges_on_pipeline(standard, grids, family):
    seed = SeedSpec.from_family(standard[family])
    for j in (0, 1):
        check = convergence_check(
            "zc", lambda g: zero_curvature_residual(family, pipeline_potentials(seed, g).potential, 0.7)[j],
            grids[family], DEFAULT_TOLERANCES)
        assert check.passed, check
