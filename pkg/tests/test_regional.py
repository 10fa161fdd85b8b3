import mpmath
import pytest

from momcert.bounds import vol_lb_122_family
from momcert.regional import (
    certify_section4,
    check_first_vol,
    check_no112,
    check_one112_curve,
    check_one112_refined,
    check_one122,
)
from momcert.scalars import precise


@pytest.fixture(scope="module")
def coarse_reports():
    return certify_section4(n2d=21, n1d=201)


def test_all_checks_validate(coarse_reports):
    names = [r.case_id for r in coarse_reports]
    assert names == ["first_vol", "2nd_vol_122", "3rd_vol_122", "2nd_vol_112_better", "3rd_vol_112"]
    for r in coarse_reports:
        assert r.status == "validated", (r.case_id, r.failures)
        assert r.min_certified_lower_bound > 2.848


def test_corner_minima(coarse_reports):
    by = {r.case_id: r for r in coarse_reports}
    assert by["3rd_vol_122"].argmin == pytest.approx([1.4751, 1.4751])
    assert by["3rd_vol_112"].argmin == pytest.approx([1.4751, 1.5152])
    assert by["2nd_vol_122"].argmin == pytest.approx([1.0, 1.8135])
    with precise():
        corner = vol_lb_122_family("one122", mpmath.mpf("1.4751"), mpmath.mpf("1.4751"))
    assert by["3rd_vol_122"].min_certified_lower_bound == pytest.approx(float(corner), rel=1e-15)


def test_reports_are_labelled_validated_not_certified(coarse_reports):
    for r in coarse_reports:
        doc = r.to_json()
        assert doc["status"] == "validated" and "argmin" in doc and "notes" in doc


def test_high_threshold_fails():
    with precise():
        for check in (check_first_vol, check_no112, check_one122, check_one112_curve, check_one112_refined):
            rep = check(3.0, 11)
            assert rep.status == "failed" and rep.failures


def test_curve_on_a_thousand_points():
    with precise():
        rep = check_one112_curve(n=1000)
    assert rep.status == "validated" and rep.boxes_processed == 1000


def test_off_edge_observations_are_notes_only():
    with precise():
        rep = check_one112_refined(n=41)
    assert rep.status == "validated"
    # the bound is not decreasing in e2 along every column; that is recorded, not fatal
    assert any("fixed e3" in n for n in rep.notes)
