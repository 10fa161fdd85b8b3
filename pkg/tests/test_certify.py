import json
import math
from fractions import Fraction

import numpy as np
import pytest

from momcert.bounds import THRESHOLD, SpectrumPoint, gate_holds, objective
from momcert.cases import get_case, the_18_cases
from momcert.certify import (
    DEFAULT_DOMAIN,
    E2_HI,
    E4_HI,
    EMPTY_CASE,
    SLICE_DOMAIN,
    Box,
    Domain,
    Strategy,
    batch_lower_bounds,
    certify_case,
    certify_cases,
    certify_slice,
    default_workers,
    lower_bound_on_box,
)
from momcert.jets import jet_from_interval


def test_domain_endpoints_are_on_the_grid():
    assert E2_HI >= 1.4751 and E2_HI - 1.4751 < 2**-30
    assert E4_HI >= 1.5152 and E4_HI - 1.5152 < 2**-30
    with pytest.raises(ValueError):
        Domain((1.0,), (1.1,), ("e2",))
    d = Domain.outward((1.4, 1.0), (1.4751, 1.5152), ("e2", "e3"))
    assert d.lo[0] <= 1.4 and d.hi[0] >= 1.4751


def test_box_halves_tile_their_parent():
    box = Box((2, 1, 0), (3, 1, 0))
    lo, hi = box.halves(2)
    (a,), (b,) = [x.bounds(DEFAULT_DOMAIN)[2:] for x in (lo, hi)]
    assert a[0] == DEFAULT_DOMAIN.lo[2] and a[1] == b[0] and b[1] == DEFAULT_DOMAIN.hi[2]


def test_point_box_at_the_corner():
    point = [(1.0, 1.0)] * 3
    f1_only = lower_bound_on_box(EMPTY_CASE, point, use_f2=False)
    assert f1_only <= 3 * math.pi / 4 and 3 * math.pi / 4 - f1_only < 1e-6
    both = lower_bound_on_box(EMPTY_CASE, point)
    assert both <= math.pi and math.pi - both < 1e-6


def test_small_box_for_case_one():
    assert lower_bound_on_box(get_case(1), [(1.47, 1.4751)] * 3) > THRESHOLD


def test_lower_bound_rejects_bad_boxes():
    with pytest.raises(ValueError):
        lower_bound_on_box(get_case(1), [(1.2, 1.1), (1.2, 1.3), (1.3, 1.4)])


def _feasible_samples(rng, bounds, n):
    """Points of the box with ``e2 <= e3 <= e4``, drawn one coordinate at a
    time so that thin feasible slivers are sampled too."""
    (l2, h2), (l3, h3), (l4, h4) = bounds
    u = rng.random((n, 3))
    e2 = l2 + u[:, 0] * (min(h2, h3, h4) - l2)
    lo3 = np.maximum(l3, e2)
    e3 = lo3 + u[:, 1] * (min(h3, h4) - lo3)
    lo4 = np.maximum(l4, e3)
    e4 = lo4 + u[:, 2] * (h4 - lo4)
    return np.column_stack([e2, e3, e4])


def _random_box(rng, max_width):
    while True:
        lo = np.array([1.0, 1.0, 1.0]) + rng.random(3) * np.array([0.4751, 0.5152, 0.5152])
        w = rng.uniform(1e-4, max_width, 3)
        hi = np.minimum(lo + w, [1.4751, 1.5152, 1.5152])
        lo = np.round(lo * 2**30) / 2**30
        hi = np.round(hi * 2**30) / 2**30
        if lo[0] <= hi[1] and lo[1] <= hi[2] and lo[0] <= hi[2] and np.all(lo < hi):
            return [(float(a), float(b)) for a, b in zip(lo, hi)]


def test_lower_bounds_never_exceed_sampled_values():
    rng = np.random.default_rng(12)
    cases = [EMPTY_CASE] + the_18_cases()
    for k in range(60):
        case = cases[k % len(cases)]
        box = _random_box(rng, 0.2 if k % 2 else 0.01)
        bound = lower_bound_on_box(case, box)
        pts = _feasible_samples(rng, box, 32)
        vals = objective(case, SpectrumPoint(pts[:, 0], pts[:, 1], pts[:, 2]))
        assert bound <= vals.min() + 1e-9


def _leaf_cells(report, depth):
    """Count how often each finest-grid cell is covered by a leaf."""
    side = 2**depth
    cover = np.zeros((side,) * 3, dtype=np.int32)
    for _, box in report.leaf_boxes:
        sl = []
        for lev, idx in zip(box.levels, box.indices):
            step = 2 ** (depth - lev)
            sl.append(slice(idx * step, (idx + 1) * step))
        cover[tuple(sl)] += 1
    return cover


@pytest.fixture(scope="module")
def case7_leaves():
    return certify_case(get_case(7), strategy=Strategy(depth=6), keep_leaves=True)


def test_leaves_tile_the_domain(case7_leaves):
    rep = case7_leaves
    assert rep.status == "certified"
    cover = _leaf_cells(rep, 6)
    assert np.all(cover == 1)
    kinds = [k for k, _ in rep.leaf_boxes]
    assert kinds.count("certified") == rep.leaves
    assert kinds.count("discarded") == rep.discarded
    total = sum(Fraction(1, 2 ** sum(b.levels)) for _, b in rep.leaf_boxes)
    assert total == 1


def test_certified_leaves_survive_dense_sampling(case7_leaves):
    rng = np.random.default_rng(5)
    case = get_case(7)
    leaves = [b for k, b in case7_leaves.leaf_boxes if k == "certified"]
    for i in rng.choice(len(leaves), 12, replace=False):
        bounds = leaves[i].bounds(DEFAULT_DOMAIN)
        # leaves may overlap e2 <= e3 <= e4 only partly; skip ones that miss it
        if bounds[0][0] > min(bounds[1][1], bounds[2][1]) or bounds[1][0] > bounds[2][1]:
            continue
        pts = _feasible_samples(rng, bounds, 10**4)
        vals = objective(case, SpectrumPoint(pts[:, 0], pts[:, 1], pts[:, 2]))
        assert vals.min() > THRESHOLD - 1e-6


def test_refining_a_certified_box_keeps_it_certified(case7_leaves):
    rng = np.random.default_rng(6)
    case = get_case(7)
    leaves = [b for k, b in case7_leaves.leaf_boxes if k == "certified"]
    for i in rng.choice(len(leaves), 20, replace=False):
        box = leaves[i]
        assert lower_bound_on_box(case, box) > THRESHOLD
        for axis in range(3):
            for half in box.halves(axis):
                assert lower_bound_on_box(case, half) > THRESHOLD


def test_gate_is_never_granted_where_it_fails_somewhere():
    rng = np.random.default_rng(8)
    granted = 0
    for _ in range(300):
        box = _random_box(rng, 0.05)
        X = [jet_from_interval(k + 1, lo, hi) for k, (lo, hi) in enumerate(box)]
        if not gate_holds(SpectrumPoint(*X)):
            continue
        granted += 1
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        pts = lo + (hi - lo) * rng.random((1000, 3))
        corners = np.array([[lo[0], 0, hi[2]]])
        pts = np.vstack([pts, corners])
        assert np.all(pts[:, 0] + 1 - pts[:, 2] ** 2 >= 0)
        assert np.all(pts[:, 2] <= 1.5152)
    assert granted > 0


def test_batch_results_do_not_depend_on_order():
    rng = np.random.default_rng(9)
    boxes = [_random_box(rng, 0.05) for _ in range(64)]
    lo = np.array([[b[0] for b in box] for box in boxes])
    hi = np.array([[b[1] for b in box] for box in boxes])
    perm = rng.permutation(64)
    a = batch_lower_bounds(get_case(2), lo, hi)
    b = batch_lower_bounds(get_case(2), lo[perm], hi[perm])
    assert np.array_equal(a[perm], b)
    single = [lower_bound_on_box(get_case(2), box) for box in boxes[:8]]
    assert single == list(a[:8])


def test_case_one_certifies():
    rep = certify_case(get_case(1))
    assert rep.status == "certified" and rep.passed
    assert rep.failures == [] and rep.min_certified_lower_bound > THRESHOLD


def test_impossible_threshold_fails_with_witnesses():
    rep = certify_case(get_case(1), strategy=Strategy(depth=3, threshold=10.0))
    assert rep.status == "failed"
    assert rep.failures and rep.failure_count >= len(rep.failures)
    witness = rep.failures[0]
    assert set(witness) == {"e2", "e3", "e4", "lower_bound"}
    assert witness["lower_bound"] is None or witness["lower_bound"] <= 10.0


def test_point_domain_at_the_corner():
    point = Domain((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    rep = certify_case(EMPTY_CASE, point, Strategy(use_f2=False))
    assert rep.status == "failed"
    assert rep.min_certified_lower_bound == pytest.approx(3 * math.pi / 4, abs=1e-6)
    # with the O(4) bonus the corner bound is pi
    assert certify_case(EMPTY_CASE, point).status == "certified"


def test_budget_exhaustion_is_reported():
    rep = certify_case(get_case(1), strategy=Strategy(budget=50))
    assert rep.status == "budget-exhausted" and not rep.passed
    assert rep.boxes_processed == 50


def test_grid_mode_covers_every_cell():
    rep = certify_case(get_case(1), strategy=Strategy(mode="grid", depth=3))
    assert rep.boxes_processed + rep.discarded == 8**3
    assert rep.max_depth_reached == 3


def test_grid_mode_certifies_a_small_region():
    dom = Domain.outward((1.4, 1.45, 1.5), (1.4751, 1.5152, 1.5152))
    rep = certify_case(get_case(1), dom, Strategy(mode="grid", depth=2))
    assert rep.status == "certified"


def test_strategy_validation():
    for kwargs in ({"mode": "random"}, {"depth": 0}, {"depth": 21}, {"threshold": 0},
                   {"workers": 0}, {"budget": 0}):
        with pytest.raises(ValueError):
            Strategy(**kwargs)


def test_slice_certifies():
    rep = certify_slice()
    assert rep.status == "certified"
    weak = certify_slice(strategy=Strategy(threshold=2.0))
    assert weak.status == "certified" and weak.boxes_processed <= rep.boxes_processed
    sub = Domain.outward((1.4, 1.0), (1.4751, 1.5152), ("e2", "e3"))
    assert certify_slice(sub).status == "certified"
    with pytest.raises(ValueError):
        certify_slice(DEFAULT_DOMAIN)


def test_bundle_json_layout():
    bundle = certify_cases([1, 2], strategy=Strategy(depth=4))
    doc = bundle.to_json(reproducible=True)
    text = json.dumps(doc, allow_nan=False)
    assert set(doc) == {"threshold", "eps_model", "domain", "strategy", "all_passed", "cases"}
    assert doc["strategy"]["workers"] is None
    assert doc["domain"] == {"e2": [1.0, E2_HI], "e3": [1.0, E4_HI], "e4": [1.0, E4_HI]}
    case = doc["cases"][0]
    for key in ("case_id", "triples", "boxes_processed", "min_lower_bound", "status", "wall_time_ms", "failures"):
        assert key in case
    assert case["wall_time_ms"] is None
    assert json.loads(text) == doc
    timed = bundle.to_json()
    assert timed["cases"][0]["wall_time_ms"] >= 0 and timed["strategy"]["workers"] == 1


def test_default_workers_reads_environment(monkeypatch):
    monkeypatch.setenv("MOMCERT_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("MOMCERT_WORKERS", "lots")
    assert default_workers() == 1
    monkeypatch.delenv("MOMCERT_WORKERS")
    assert default_workers() == 1


def test_slice_domain_shape():
    assert SLICE_DOMAIN.dim == 2 and SLICE_DOMAIN.names == ("e2", "e3")
