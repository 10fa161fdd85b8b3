"""Dense-grid validation of the single-configuration volume bounds.

These bounds contain ``acos`` and square roots, so they are checked in the
precise scalar kind on dense grids together with the monotonicity pattern that
puts each minimum at a known corner.  Reports carry the status ``validated``
(or ``failed``), never ``certified``.
"""

from __future__ import annotations

import time
from typing import Callable

import mpmath

from .bounds import THRESHOLD, vol_lb_122_family, vol_lb_first
from .certify import CaseReport
from .scalars import precise

# decimal corner values, read exactly into the working precision
E2_MAX = "1.4751"
E_CAP = "1.5152"
E3_NO112 = "1.8135"
E3_ONE112 = "2.1491"


def _mp(x) -> mpmath.mpf:
    return mpmath.mpf(x)


def _linspace(a, b, n):
    a, b = _mp(a), _mp(b)
    if n == 1:
        return [a]
    return [a + (b - a) * k / (n - 1) for k in range(n)]


def _monotone(values, direction: int) -> bool:
    """``direction`` +1: nondecreasing, -1: nonincreasing."""
    return all(direction * (y - x) >= 0 for x, y in zip(values, values[1:]))


class _Check:
    def __init__(self, name: str, threshold: float):
        self.name = name
        self.threshold = _mp(threshold)
        self.points = 0
        self.minimum = None
        self.argmin = None
        self.problems: list[str] = []
        self.notes: list[str] = []
        self.start = time.perf_counter()

    def value(self, v, where):
        self.points += 1
        if self.minimum is None or v < self.minimum:
            self.minimum, self.argmin = v, where
        return v

    def require(self, ok: bool, message: str):
        if not ok:
            self.problems.append(message)

    def observe(self, ok: bool, message: str):
        """Record a side observation that does not affect the verdict."""
        if not ok:
            self.notes.append(message)

    def report(self, expected_argmin=None) -> CaseReport:
        if self.minimum is not None and not self.minimum > self.threshold:
            self.problems.append(f"minimum {mpmath.nstr(self.minimum, 12)} at {self.argmin} "
                                 f"does not exceed {self.threshold}")
        if expected_argmin is not None and self.argmin is not None:
            got = tuple(float(x) for x in self.argmin)
            want = tuple(float(x) for x in expected_argmin)
            if any(abs(g - w) > 1e-12 for g, w in zip(got, want)):
                self.problems.append(f"minimum found at {got}, expected {want}")
        status = "failed" if self.problems else "validated"
        rep = CaseReport(case_id=self.name, triples=[], boxes_processed=self.points, leaves=self.points,
                         min_certified_lower_bound=float(self.minimum) if self.minimum is not None else float("nan"),
                         status=status, validated=True)
        rep.failures = [{"reason": p} for p in self.problems]
        rep.failure_count = len(self.problems)
        rep.notes = list(self.notes)
        if self.argmin is not None:
            rep.argmin = [float(x) for x in self.argmin]
        rep.wall_time_ms = (time.perf_counter() - self.start) * 1e3
        return rep


def check_first_vol(threshold=THRESHOLD, n: int = 1001, upper="3") -> CaseReport:
    """The O(2)-packing bound exceeds ``threshold`` at ``e2 = 1.4751`` and
    increases on ``[1, upper]``, hence beyond 1.4751."""
    chk = _Check("first_vol", threshold)
    values = [vol_lb_first(x) for x in _linspace(1, upper, n)]
    chk.require(_monotone(values, +1), "bound is not increasing in e2")
    e2 = _mp(E2_MAX)
    chk.value(vol_lb_first(e2), (e2,))
    return chk.report()


def check_no112(threshold=THRESHOLD, n: int = 101, e3_upper="2.5") -> CaseReport:
    """No (1,1,2) triple: the bound exceeds ``threshold`` for ``e3 >= 1.8135``.

    On ``[1, 1.4751] x [1.8135, e3_upper]`` the bound is nondecreasing in
    each variable, so its minimum is the corner ``(1, 1.8135)``.  (For small
    ``e3`` the bound decreases in ``e2``; that part of the plane plays no
    role here and is only noted.)
    """
    chk = _Check("2nd_vol_122", threshold)
    e2s = _linspace(1, E2_MAX, n)
    e3s = _linspace(E3_NO112, e3_upper, n)
    grid = [[chk.value(vol_lb_122_family("no112", a, b), (a, b)) for b in e3s] for a in e2s]
    chk.require(all(_monotone(row, +1) for row in grid), "not nondecreasing in e3")
    chk.require(all(_monotone([row[j] for row in grid], +1) for j in range(n)), "not nondecreasing in e2")
    low = [vol_lb_122_family("no112", a, _mp(1)) for a in e2s]
    chk.observe(_monotone(low, +1), "decreasing in e2 at e3 = 1 (outside the region used)")
    return chk.report(expected_argmin=(_mp(1), _mp(E3_NO112)))


def _region(chk: _Check, variant: str, e2s, e3_range: Callable, n: int, e2_direction: int):
    """Grid over ``e2s`` x ``e3_range(e2)``.

    Required: the bound is nondecreasing in ``e3`` along every row, and
    monotone in ``e2`` (direction ``e2_direction``) along the lower edge, which
    together put the minimum at a corner.  Monotonicity in ``e2`` away from
    the lower edge is only observed.
    """
    rows = []
    for a in e2s:
        lo, hi = e3_range(a)
        rows.append([chk.value(vol_lb_122_family(variant, a, b), (a, b)) for b in _linspace(lo, hi, n)])
    chk.require(all(_monotone(row, +1) for row in rows), "not increasing in e3")
    lower_edge = [row[0] for row in rows]
    chk.require(_monotone(lower_edge, e2_direction), "not monotone in e2 along the lower edge")
    word = "increasing" if e2_direction > 0 else "decreasing"
    for j in range(1, n):
        col = [row[j] for row in rows]
        chk.observe(_monotone(col, e2_direction), f"not {word} in e2 along grid column {j}")
    return rows


def check_one122(threshold=THRESHOLD, n: int = 101) -> CaseReport:
    """At most one (1,2,2) triple: over ``1 <= e2 <= 1.4751 <= e3 <= 1.8135``
    the bound stays above ``threshold``, with its minimum at
    ``e2 = e3 = 1.4751``."""
    chk = _Check("3rd_vol_122", threshold)
    e2s = _linspace(1, E2_MAX, n)
    _region(chk, "one122", e2s, lambda a: (_mp(E2_MAX), _mp(E3_NO112)), n, -1)
    return chk.report(expected_argmin=(_mp(E2_MAX), _mp(E2_MAX)))


def check_one112_curve(threshold=THRESHOLD, n: int = 1001) -> CaseReport:
    """One (1,1,2) triple: the bound exceeds ``threshold`` along the curve
    ``e3 = 2.1491 - (e2 - 1)``, ``1 <= e2 <= 1.4751``."""
    chk = _Check("2nd_vol_112_better", threshold)
    for a in _linspace(1, E2_MAX, n):
        b = _mp(E3_ONE112) - (a - 1)
        chk.value(vol_lb_122_family("one112", a, b), (a, b))
    return chk.report()


def check_one112_refined(threshold=THRESHOLD, n: int = 101) -> CaseReport:
    """One (1,1,2) and no (1,2,2) triple: over ``1 <= e2 <= 1.4751``,
    ``1.5152 <= e3 <= 2.1491 - (e2 - 1)`` the bound stays above
    ``threshold``, with its minimum at ``(1.4751, 1.5152)``."""
    chk = _Check("3rd_vol_112", threshold)
    e2s = _linspace(1, E2_MAX, n)
    _region(chk, "one112_refined", e2s, lambda a: (_mp(E_CAP), _mp(E3_ONE112) - (a - 1)), n, -1)
    for b in _linspace(E_CAP, E3_ONE112, 21):
        col = [vol_lb_122_family("one112_refined", a, b) for a in e2s if b <= _mp(E3_ONE112) - (a - 1)]
        chk.observe(_monotone(col, -1), f"not decreasing in e2 at fixed e3 = {mpmath.nstr(b, 8)}")
    return chk.report(expected_argmin=(_mp(E2_MAX), _mp(E_CAP)))


def certify_section4(threshold=THRESHOLD, n2d: int = 101, n1d: int = 1001) -> list[CaseReport]:
    """All five regional checks, in precise arithmetic."""
    with precise():
        return [
            check_first_vol(threshold, n1d),
            check_no112(threshold, n2d),
            check_one122(threshold, n2d),
            check_one112_curve(threshold, n1d),
            check_one112_refined(threshold, n2d),
        ]
