import numpy as np
import pytest

from mkp_darboux import (DegenerateSeedError, FamilyParams, Grid3, SeedSpec, SingularPointError,
                         ValidationError, VectorPotential, assemble_S, closed_form_field, closed_form_q,
                         delta3_vacuum, mkp_residual, pipeline_potentials, pipeline_q, solve_block_split,
                         transform_potentials, vacuum_eigenfunctions)
from mkp_darboux.darboux import (SMatrices, block_split, delta21_x_residual, eigenfunction_matrix,
                                 rep3_delta3_residuals, s_blocks, s_evolution_residuals, similarity,
                                 transform_arrays, vacuum_eigenfunction_residuals)
from mkp_darboux.verify import DEFAULT_TOLERANCES, convergence_check


def seed_of(standard, family, **kw):
    return SeedSpec.from_family(standard[family], **kw)


# --------------------------------------------------------------------------
# seeds and eigenfunctions

@pytest.mark.parametrize("kw", [
    dict(lambdas=(1.0, 1.0)),
    dict(lambdas=(0.0, 2.0)),
    dict(amplitudes=[[1.0, 0.0], [1.0, 1.0]]),
    dict(amplitudes=[[1.0, 1.0, 1.0]]),
    dict(delta11=0.0),
    dict(delta4=[[1.0, 2.0], [3.0, 4.0]]),
    dict(rep=5),
])
def test_seed_validation(kw):
    spec = dict(rep=1, lambdas=(1.0, 2.0), amplitudes=[[1.0, 1.0], [-1.0, 1.0]])
    spec.update(kw)
    with pytest.raises(ValidationError):
        SeedSpec(**spec)


def test_delta3_anchor_only_for_rep3():
    with pytest.raises(ValidationError):
        SeedSpec(1, (1.0, 2.0), [[1.0, 1.0], [-1.0, 1.0]], delta3_anchor=[0.5])


def test_rep1_eigenfunction_value():
    seed = SeedSpec(1, (1.0, 2.0), [[1.0, 1.0], [-1.0, 1.0]])
    h = vacuum_eigenfunctions(seed, 0, (1.0, 0.0, 0.0))
    assert h[0] == pytest.approx(2.718281828459045, rel=1e-15)
    assert h[1] == pytest.approx(-np.exp(-1.0), rel=1e-15)


@pytest.mark.parametrize("rep", [1, 2, 3, 4])
def test_eigenfunctions_at_origin_equal_amplitudes(rep):
    amp = np.array([[1.5, -2.0, 0.3], [0.7, 4.0, -1.0], [2.0, 0.5, 3.0]])
    seed = SeedSpec(rep, (0.5, -1.0, 2.0), amp)
    for k in range(3):
        np.testing.assert_array_equal(vacuum_eigenfunctions(seed, k, (0.0, 0.0, 0.0)), amp[:, k])


@pytest.mark.parametrize("rep", [1, 2, 3, 4])
def test_eigenfunctions_solve_vacuum_system(rep):
    seed = SeedSpec(rep, (0.5, 0.8), [[1.0, 2.0], [-1.0, 0.5]])
    errs = []
    for k in (0, 1):
        g = Grid3(-1.0, 1.0, 17 * 2 ** k - 2 ** k + 1, -0.5, 0.5, 17 * 2 ** k - 2 ** k + 1,
                  -0.2, 0.2, 17 * 2 ** k - 2 ** k + 1)
        res = vacuum_eigenfunction_residuals(seed, 0, g)
        errs.append(max(np.max(np.abs(r[::2 ** k, ::2 ** k, ::2 ** k][2:-2, 2:-2, 2:-2])) for r in res))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_rep3_eigenfunction_x_derivative():
    seed = SeedSpec(3, (0.5, 1.5), [[1.0, 1.0], [1.0, -1.0]])
    errs = []
    for nx in (33, 65):
        g = Grid3(-2.0, 2.0, nx, 0.0, 1.0, 5, 0.0, 1.0, 5)
        rx = vacuum_eigenfunction_residuals(seed, 0, g)[0]
        errs.append(np.max(np.abs(rx[2:-2, 2:-2, 2:-2])))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


# --------------------------------------------------------------------------
# S for reps 1 and 3

def test_s12_golden(standard):
    sm = assemble_S(seed_of(standard, 1), (0.0, 0.0, 0.0))
    assert sm.S[0, 1] == pytest.approx(0.5, abs=1e-12)


def test_identity_eigenvectors_give_lambda():
    lam = np.array([1.0, -2.0, 3.5])
    np.testing.assert_array_equal(similarity(np.eye(3), lam), np.diag(lam))


@pytest.mark.parametrize("family", [1, 3])
def test_similarity_eigenvalues(standard, family, rng):
    seed = seed_of(standard, family)
    pts = rng.uniform(-3.0, 3.0, size=(50, 3)) * [1.0, 0.1, 0.01]
    S = s_blocks(seed, pts[:, 0], pts[:, 1], pts[:, 2])
    ev = np.sort(np.linalg.eigvals(S).real, axis=-1)
    np.testing.assert_allclose(ev, np.broadcast_to([1.0, 2.0], ev.shape), rtol=1e-10)


def test_similarity_for_larger_n(rng):
    lam = (0.5, 1.0, 1.5, 2.0)
    seed = SeedSpec(1, lam, rng.uniform(0.5, 1.5, (4, 4)))
    S = assemble_S(seed, (0.2, -0.1, 0.05)).S
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(S).real), lam, rtol=1e-10)


def test_singular_h_raises():
    seed = SeedSpec(1, (1.0, 2.0), [[1.0, 2.0], [1.0, 2.0]])
    with pytest.raises(DegenerateSeedError) as info:
        assemble_S(seed, (0.0, 0.0, 0.0))
    assert info.value.point == (0.0, 0.0, 0.0)


def test_assemble_and_split_reject_wrong_rep(standard):
    with pytest.raises(ValidationError):
        assemble_S(seed_of(standard, 2), (0.0, 0.0, 0.0))
    with pytest.raises(ValidationError):
        solve_block_split(seed_of(standard, 1), (0.0, 0.0, 0.0))


@pytest.mark.parametrize("family", [1, 3])
def test_s_evolution_converges(standard, grids, family):
    seed = seed_of(standard, family)
    for j in range(3):
        check = convergence_check("s", lambda g: s_evolution_residuals(seed, g)[j], grids[family],
                                  DEFAULT_TOLERANCES)
        assert 3.5 <= check.ratio <= 4.5


# --------------------------------------------------------------------------
# block split for reps 2 and 4

def test_block_diagonal_t_gives_zero_perp():
    T = np.diag([2.0, 3.0, -1.0])
    T[1, 2] = T[2, 1] = 0.5
    blocks = block_split(T, T @ T)
    sm = SMatrices(2, blocks, np.asarray(1.0), np.eye(2))
    assert np.all(sm.perp == 0.0)
    np.testing.assert_allclose(sm.top, T @ T, rtol=1e-15)


def test_block_split_rep2_golden(standard):
    # exact rational solve: T = [[3/2, -1/2], [-1/2, 3/2]], T2 = [[5/2, -3/2], [-3/2, 5/2]]
    sm = solve_block_split(seed_of(standard, 2), (0.0, 0.0, 0.0))
    np.testing.assert_allclose(sm.blocks, [[2.0, -1.0], [-1.0, 2.0]], rtol=0, atol=1e-14)


@pytest.mark.parametrize("family", [2, 4])
def test_block_split_relation(standard, family, rng):
    seed = seed_of(standard, family)
    pts = rng.uniform(-1.0, 1.0, size=(100, 3)) * [4.0, 0.025, 0.0015]
    H = eigenfunction_matrix(seed, pts[:, 0], pts[:, 1], pts[:, 2])
    T, T2 = similarity(H, np.array(seed.lambdas)), similarity(H, np.array(seed.lambdas) ** 2)
    sm = SMatrices(family, s_blocks(seed, pts[:, 0], pts[:, 1], pts[:, 2]), np.asarray(1.0), np.eye(1))
    err = np.max(np.abs(sm.perp @ T + sm.top - T2), axis=(-1, -2)) / np.max(np.abs(T2), axis=(-1, -2))
    assert np.max(err) < 1e-12


def test_block_split_relation_for_larger_n(rng):
    lam = np.array([0.5, 1.0, 1.7])
    seed = SeedSpec(2, lam, rng.uniform(0.5, 1.5, (3, 3)))
    H = eigenfunction_matrix(seed, 0.1, 0.2, 0.0)
    sm = solve_block_split(seed, (0.1, 0.2, 0.0))
    np.testing.assert_allclose(sm.perp @ similarity(H, lam) + sm.top, similarity(H, lam ** 2), atol=1e-12)
    assert np.all(sm.perp[0, 0] == 0.0) and np.all(sm.perp[1:, 1:] == 0.0)
    assert np.all(sm.top[0, 1:] == 0.0) and np.all(sm.top[1:, 0] == 0.0)


# --------------------------------------------------------------------------
# delta21 and the transform

def test_delta21_golden(standard):
    assert delta3_vacuum(seed_of(standard, 1), (0.0, 0.0, 0.0)) == pytest.approx(-1.0 / 3.0, abs=1e-12)


def test_delta21_linear_in_delta22(standard, rng):
    for x, y, t in rng.uniform(-1.0, 1.0, size=(5, 3)):
        one = delta3_vacuum(seed_of(standard, 1), (x, y, t))
        two = delta3_vacuum(seed_of(standard, 1, delta4=2.0), (x, y, t))
        assert two == 2.0 * one


def test_delta21_denominator_singular():
    # alpha1 alpha2 lam2 h12^2 - alpha3 alpha4 lam1 h11^2 vanishes at the origin for alpha = (2, 1, 1, 1)
    seed = SeedSpec(1, (1.0, 2.0), [[2.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularPointError):
        delta3_vacuum(seed, (0.0, 0.0, 0.0))


def test_delta21_x_equation_converges(standard, grids):
    check = convergence_check("d21", lambda g: delta21_x_residual(seed_of(standard, 1), g), grids[1],
                              DEFAULT_TOLERANCES)
    assert 3.5 <= check.ratio <= 4.5


@pytest.mark.parametrize("rep", [1, 2, 3, 4])
def test_zero_s_gives_zero_potentials(rep):
    g = Grid3(-1.0, 1.0, 5, 0.0, 1.0, 5, 0.0, 1.0, 5)
    zeros = np.zeros(g.shape + (2, 2))
    d4 = np.broadcast_to(np.eye(1), g.shape + (1, 1))
    d3 = np.zeros(g.shape + (1, 1)) if rep in (1, 3) else None
    sm = SMatrices(rep, zeros, np.ones(g.shape), d4, d3)
    branch = "CLL" if rep <= 2 else "KN"
    new = transform_potentials(rep, VectorPotential.vacuum(g, 1, branch), sm)
    for a in new.arrays():
        assert np.all(a == 0.0)


def test_rep2_q_is_twice_s2_s3(standard, grids):
    res = pipeline_potentials(seed_of(standard, 2), grids[2])
    sm = res.smat
    np.testing.assert_allclose(res.q.values, 2.0 * sm.s2[..., 0, 0] * sm.s3[..., 0, 0], rtol=1e-14)


def test_rep1_q_at_origin(standard):
    seed = seed_of(standard, 1)
    sm = assemble_S(seed, (0.0, 0.0, 0.0))
    d21 = delta3_vacuum(seed, (0.0, 0.0, 0.0))
    row, col = transform_arrays(1, np.zeros(1), np.zeros(1),
                                SMatrices(1, sm.blocks, np.asarray(1.0), seed.delta4, np.array([[d21]])))
    q = -0.5 * float(row @ col)
    assert q == pytest.approx(-1.0 / 3.0, abs=1e-12)
    assert q == pytest.approx(closed_form_q(standard[1], (0.0, 0.0, 0.0)), abs=1e-12)


def test_singular_delta4_rejected(standard):
    g = Grid3(-1.0, 1.0, 5, 0.0, 1.0, 5, 0.0, 1.0, 5)
    sm = SMatrices(2, np.zeros(g.shape + (2, 2)), np.ones(g.shape), np.zeros(g.shape + (1, 1)))
    with pytest.raises(DegenerateSeedError):
        transform_potentials(2, VectorPotential.vacuum(g, 1, "CLL"), sm)


# --------------------------------------------------------------------------
# pipeline

@pytest.mark.parametrize("family", [1, 2, 4])
def test_pipeline_matches_closed_form(standard, grids, family):
    q = pipeline_q(standard[family], grids[family]).values
    assert np.max(np.abs(q - closed_form_field(standard[family], grids[family]).values)) < 1e-8


def test_family3_pipeline_residual_converges(standard, grids):
    check = convergence_check("mkp3", lambda g: mkp_residual(pipeline_q(standard[3], g)), grids[3],
                              DEFAULT_TOLERANCES)
    assert 3.5 <= check.ratio <= 4.5


def test_family3_delta3_equations_converge(standard, grids):
    seed = seed_of(standard, 3)
    for j in (0, 1):
        check = convergence_check("d3", lambda g: rep3_delta3_residuals(pipeline_potentials(seed, g))[j],
                                  grids[3], DEFAULT_TOLERANCES)
        assert 3.5 <= check.ratio <= 4.5


def test_family3_pipeline_is_mirror_of_family1(standard, grids):
    # with the default anchor the rep-3 output is -q1(x, -y, t) up to the RK4 error
    g = grids[3]
    q3 = pipeline_q(standard[3], g).values
    q1 = closed_form_field(standard[1], g).values[:, ::-1, :]
    assert np.max(np.abs(q3 + q1)) < 1e-4


def test_family3_explicit_anchor(standard, grids):
    g = grids[3]
    anchor = delta3_vacuum(seed_of(standard, 3), (g.x_min, 0.0, 0.0))
    q = pipeline_q(standard[3], g, delta3_anchor=[anchor]).values
    assert np.all(np.isfinite(q))


@pytest.mark.parametrize("family", [1, 2, 3, 4])
@pytest.mark.parametrize("c", [2.0, -3.0, 10.0])
def test_gauge_invariance(standard, grids, family, c):
    base = pipeline_q(standard[family], grids[family]).values
    for kw in ({"delta11": c}, {"delta4": c}, {"delta11": c, "delta4": c}):
        q = pipeline_q(standard[family], grids[family], **kw).values
        assert np.max(np.abs(q - base)) <= 1e-12


@pytest.mark.parametrize("family", [2, 4])
def test_amplitude_rescaling(standard, grids, family):
    p = standard[family]
    scaled = FamilyParams(family, p.lambdas, tuple(3.0 * a for a in p.alphas))
    np.testing.assert_allclose(pipeline_q(scaled, grids[family]).values,
                               pipeline_q(p, grids[family]).values, rtol=0, atol=1e-12)
    np.testing.assert_allclose(closed_form_field(scaled, grids[family]).values,
                               closed_form_field(p, grids[family]).values, rtol=0, atol=1e-12)


def test_pipeline_reports_degenerate_point():
    # the same singular seed as above: the pipeline names a failing point
    p = FamilyParams(1, (1.0, 2.0), (2.0, 1.0, 1.0, 1.0))
    g = Grid3(-1.0, 1.0, 5, -0.1, 0.1, 5, -0.01, 0.01, 5)
    with pytest.raises(SingularPointError) as info:
        pipeline_q(p, g)
    assert info.value.point is not None
