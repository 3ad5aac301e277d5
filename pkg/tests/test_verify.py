import numpy as np
import pytest

from mkp_darboux import Grid3, ScalarField3, ValidationError, run_suite
from mkp_darboux.verify import Check, VerificationReport, coarse_interior_max, convergence_check


def test_coarse_interior_max_uses_coarse_nodes():
    g = Grid3(0.0, 1.0, 9, 0.0, 1.0, 9, 0.0, 1.0, 9)
    v = np.zeros(g.shape)
    v[4, 4, 4] = 2.0
    v[5, 5, 5] = 7.0   # not a node of the once-coarsened grid
    f = ScalarField3(g, v)
    assert coarse_interior_max(f, 0) == 7.0
    assert coarse_interior_max(f, 1, margin=1) == 2.0


def test_convergence_check_on_known_second_order_error():
    g = Grid3(0.0, 1.0, 17, 0.0, 1.0, 5, 0.0, 1.0, 5)
    check = convergence_check("h2", lambda gr: ScalarField3.constant(gr, gr.spacing("x") ** 2),
                              g, {"ratio_min": 3.0, "ratio_max": 5.0})
    assert check.passed
    assert check.ratio == pytest.approx(4.0)


def test_convergence_check_identically_zero_passes():
    g = Grid3(0.0, 1.0, 9, 0.0, 1.0, 5, 0.0, 1.0, 5)
    check = convergence_check("zero", lambda gr: ScalarField3.constant(gr), g,
                              {"ratio_min": 3.0, "ratio_max": 5.0})
    assert check.passed and check.ratio is None


def test_report_overall_flag():
    report = VerificationReport({}, {}, [Check("a", True, 0.0, 1.0), Check("b", False, 2.0, 1.0)])
    assert not report.passed
    assert report.failing == ["b"]
    assert report.summary().splitlines()[-1] == "overall: FAIL b"
    assert report.to_dict()["checks"][1]["name"] == "b"


def test_run_suite_rejects_bad_options(standard):
    with pytest.raises(ValidationError):
        run_suite(standard[1], tolerances={"nope": 1.0})
    with pytest.raises(ValidationError):
        run_suite(standard[1], refine=0)


@pytest.mark.parametrize("family", [1, 2, 3, 4])
def test_run_suite_passes(standard, family):
    report = run_suite(standard[family])
    assert report.passed, report.summary()
    names = {c.name for c in report.checks}
    assert "gauge_invariance" in names
    assert sum(n.startswith("zero_curvature_") for n in names) == 7
