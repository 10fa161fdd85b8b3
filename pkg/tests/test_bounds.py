import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momcert.bounds import (
    E_CAP,
    SpectrumPoint,
    a0,
    e_max,
    f1,
    f1_via_lessvol,
    f2,
    f2_bonus,
    gate_holds,
    l_term,
    objective,
    vol_lb_122_family,
    vol_lb_first,
)
from momcert.cases import get_case, the_18_cases, valid_types
from momcert.geometry import overlap_approx
from momcert.jets import jet_from_interval
from momcert.scalars import ScalarKind, evaluate, precise
from oracles import contains_at

ONE = SpectrumPoint(1.0, 1.0, 1.0)


def test_point_values_at_the_corner():
    assert f1((), ONE) == pytest.approx(3 * math.pi / 4, abs=1e-12)
    assert a0(ONE) == pytest.approx(3 * math.pi / 2, abs=1e-12)
    assert f2_bonus(ONE) == pytest.approx(math.pi / 4, abs=1e-12)
    assert f2((), ONE) == pytest.approx(math.pi, abs=1e-12)


def test_corner_values_in_precise_kind():
    with precise():
        pt = SpectrumPoint(mpmath.mpf(1), mpmath.mpf(1), mpmath.mpf(1))
        assert abs(f1((), pt) - 3 * mpmath.pi / 4) < mpmath.mpf(10) ** -70
        assert abs(a0(pt) - 3 * mpmath.pi / 2) < mpmath.mpf(10) ** -70


def test_e_max():
    assert e_max(SpectrumPoint(1.0, 1.1, 1.2)) == 1.2
    assert e_max(SpectrumPoint(1.0, 1.1, 2.0)) == E_CAP
    assert e_max(SpectrumPoint(1.0, 1.1, E_CAP)) == E_CAP


def test_spectrum_point_rejects_bad_ordering():
    with pytest.raises(ValueError):
        SpectrumPoint(1.2, 1.1, 1.3)
    with pytest.raises(ValueError):
        SpectrumPoint(0.9, 1.0, 1.0)
    assert SpectrumPoint(1.0, 1.2, 1.3).e(1) == 1.0


def test_a0_formula():
    pt = SpectrumPoint(1.2, 1.3, 1.4)
    with precise():
        em = mpmath.mpf(1.4)
        want = sum(2 * mpmath.pi * (em * (1 / mpmath.mpf(e) - mpmath.mpf(0.5))) ** 2 for e in (1, 1.2, 1.3))
    assert a0(pt) == pytest.approx(float(want), rel=1e-13)


def test_l_term_examples():
    assert l_term(1, 1, 2, ONE) == pytest.approx(0.0, abs=1e-15)
    # inactive clamp: c = e2
    pt = SpectrumPoint(1.1, 1.2, 1.3)
    assert l_term(1, 1, 2, pt) == pytest.approx(overlap_approx(0.65, 0.65, 1.1), rel=1e-13)
    # active clamp: c = a + b, tangency, zero overlap
    pt = SpectrumPoint(1.1, 1.52, 1.6)
    assert l_term(1, 1, 3, pt) == pytest.approx(0.0, abs=1e-14)
    for i, j, k in [(1, 2, 3), (2, 3, 1), (1, 3, 2)]:
        assert l_term(i, j, k, pt) == l_term(j, i, k, pt)
    with pytest.raises(ValueError):
        l_term(1, 2, 5, pt)


def test_f1_depends_on_e4_only_through_the_cap():
    case = get_case(3)
    a = f1(case, SpectrumPoint(1.2, 1.3, 1.6))
    b = f1(case, SpectrumPoint(1.2, 1.3, 2.5))
    c = f1(case, SpectrumPoint(1.2, 1.3, E_CAP))
    assert a == b == c


def test_f1_example_with_two_triples():
    case = [(1, 1, 2), (1, 1, 3)]
    with precise():
        exact = f1(case, SpectrumPoint(*(mpmath.mpf("1.1"),) * 3))
    J = evaluate(lambda a, b, c: f1(case, SpectrumPoint(a, b, c)), 1.1, 1.1, 1.1, kind=ScalarKind.JET)
    assert abs(exact - mpmath.mpf(J.f0)) <= mpmath.mpf(J.fe)


def test_gate_examples():
    assert not gate_holds(SpectrumPoint(1.0, 1.2, 1.5))
    assert gate_holds(ONE)
    assert not gate_holds(SpectrumPoint(1.4, 1.45, 1.52))
    # boundary e2 + 1 = e4^2: bonus is finite
    e4 = 1.5
    pt = SpectrumPoint(e4 * e4 - 1, 1.3, e4)
    assert math.isfinite(f2_bonus(pt))


def test_objective_uses_f2_only_under_the_gate():
    pt = SpectrumPoint(1.0, 1.2, 1.5)
    assert objective(get_case(1), pt) == f1(get_case(1), pt)
    assert objective((), ONE) == pytest.approx(math.pi)


def test_vol_lb_first_values():
    assert vol_lb_first(1.0) == pytest.approx(math.sqrt(3) / 2, rel=1e-15)
    assert vol_lb_first(1.4751) > 2.848
    x = np.linspace(1, 1.6, 601)
    assert np.all(np.diff(vol_lb_first(x)) > 0)


def test_family_corner_values():
    assert vol_lb_122_family("no112", 1.0, 1.8135) > 2.848
    assert vol_lb_122_family("one122", 1.4751, 1.4751) > 2.848
    assert vol_lb_122_family("one112", 1.0, 2.1491) > 2.848
    assert vol_lb_122_family("one112_refined", 1.4751, 1.5152) > 2.848
    with pytest.raises(ValueError):
        vol_lb_122_family("bogus", 1.0, 1.0)


def test_no112_monotone_on_the_region_used():
    e2 = np.linspace(1, 1.4751, 80)
    e3 = np.linspace(1.8135, 2.5, 80)
    A, B = np.meshgrid(e2, e3, indexing="ij")
    V = vol_lb_122_family("no112", A, B)
    assert np.all(np.diff(V, axis=0) >= 0) and np.all(np.diff(V, axis=1) >= 0)


def test_no112_not_monotone_in_e2_for_small_e3():
    # e2^2 e3^2 sqrt(3)/2 grows slower in e2 than the pi-term when e3 is small
    v = vol_lb_122_family("no112", np.linspace(1, 1.4751, 50), 1.0)
    assert np.any(np.diff(v) < 0)


def test_one122_and_one112_refined_directions():
    for variant, e3_of in (("one122", lambda a: np.linspace(1.4751, 1.8135, 40)),
                           ("one112_refined", lambda a: np.linspace(1.5152, 2.1491 - (a - 1), 40))):
        lower = []
        for a in np.linspace(1, 1.4751, 40):
            v = vol_lb_122_family(variant, a, e3_of(a))
            assert np.all(np.diff(v) > 0), variant
            lower.append(v[0])
        assert np.all(np.diff(lower) < 0), variant


def test_lessvol_identity_at_many_points():
    rng = np.random.default_rng(1)
    cases = [()] + the_18_cases()
    with precise():
        for k in range(1000):
            e2, e3, e4 = sorted(rng.uniform(1, 1.6, 3))
            pt = SpectrumPoint(mpmath.mpf(e2), mpmath.mpf(e3), mpmath.mpf(e4))
            case = cases[k % len(cases)]
            assert abs(f1(case, pt) - f1_via_lessvol(case, pt)) < 1e-12


def test_adding_a_triple_never_increases_f1():
    rng = np.random.default_rng(2)
    types = valid_types()
    for _ in range(300):
        e2, e3, e4 = sorted(rng.uniform(1, 1.6, 3))
        pt = SpectrumPoint(e2, e3, e4)
        case = [tuple(types[i]) for i in rng.choice(len(types), rng.integers(0, 3))]
        extra = tuple(types[rng.integers(len(types))])
        assert f1(case + [extra], pt) <= f1(case, pt) + 1e-12


def test_plain_and_precise_agree():
    rng = np.random.default_rng(4)
    for case in the_18_cases():
        e2, e3, e4 = sorted(rng.uniform(1, 1.5152, 3))
        plain = objective(case, SpectrumPoint(e2, e3, e4))
        with precise():
            ref = objective(case, SpectrumPoint(*(mpmath.mpf(v) for v in (e2, e3, e4))))
        assert plain == pytest.approx(float(ref), rel=1e-9)
    for v, a, b in (("no112", 1.2, 1.9), ("one122", 1.3, 1.6), ("one112", 1.1, 2.0), ("one112_refined", 1.3, 1.6)):
        with precise():
            ref = vol_lb_122_family(v, mpmath.mpf(a), mpmath.mpf(b))
        assert vol_lb_122_family(v, a, b) == pytest.approx(float(ref), rel=1e-9)


def _box_point(boxes, x):
    return [mpmath.mpf(lo) + (mpmath.mpf(xi) + 1) / 2 * (mpmath.mpf(hi) - mpmath.mpf(lo))
            for (lo, hi), xi in zip(boxes, x)]


@st.composite
def spectrum_boxes(draw):
    w = draw(st.sampled_from([2.0**-6, 2.0**-9, 2.0**-12]))
    lo2 = draw(st.integers(0, int(0.47 / w))) * w + 1
    lo3 = lo2 + w + draw(st.integers(0, int(0.04 / w))) * w
    lo4 = lo3 + w + draw(st.integers(0, int(0.04 / w))) * w
    return [(lo2, lo2 + w), (lo3, lo3 + w), (lo4, lo4 + w)]


@settings(max_examples=60, deadline=None)
@given(spectrum_boxes(), st.sampled_from(range(0, 19)),
       st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)), min_size=4, max_size=4))
def test_jet_f1_and_f2_contain_interior_values(boxes, case_id, xs):
    case = () if case_id == 0 else get_case(case_id)
    X = [jet_from_interval(k + 1, lo, hi) for k, (lo, hi) in enumerate(boxes)]
    pt = SpectrumPoint(*X)
    F1 = f1(case, pt)
    gate = bool(gate_holds(pt))
    F2 = f2(case, pt) if gate else None
    with mpmath.workprec(256):
        for x in xs + [(-1, -1, -1), (1, 1, 1)]:
            p = SpectrumPoint(*_box_point(boxes, x))
            assert contains_at(F1, 0, x, f1(case, p))
            if gate:
                assert contains_at(F2, 0, x, f2(case, p))
