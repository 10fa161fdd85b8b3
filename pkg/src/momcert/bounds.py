"""Volume lower bounds as functions of the Euclidean spectrum ``(e2, e3, e4)``.

Two families live here.  The cusp-area bounds :func:`f1` and :func:`f2` drive
the branch-and-bound certification and work in every scalar kind.  The
single-configuration bounds (:func:`vol_lb_first`, :func:`vol_lb_122_family`)
use the exact lens area and so only run in plain or precise kinds.

Throughout, ``e1 = 1`` and ``e_max = min(e4, E_CAP)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import mpmath
import numpy as np

from .geometry import lessvol, overlap_approx, overlap_area
from .jets import Jet, jet_range
from .scalars import ScalarKind, constant, kind_of, log, maximum, minimum

# Cap on e4 in the cusp-area argument, taken as the double nearest 1.5152.
E_CAP = 1.5152
# Upper end of e2 on the certified domain.
E2_MAX = 1.4751
THRESHOLD = 2.848

VARIANTS = ("no112", "one122", "one112", "one112_refined")


@dataclass(frozen=True)
class SpectrumPoint:
    """A point (or, with jet fields, a box) of spectrum space."""

    e2: Any
    e3: Any
    e4: Any

    def __post_init__(self):
        kind = kind_of(self.e2, self.e3, self.e4)
        if kind is ScalarKind.JET:
            return
        e2, e3, e4 = (np.asarray(v, dtype=float) for v in (self.e2, self.e3, self.e4))
        if not np.all((1 <= e2) & (e2 <= e3) & (e3 <= e4)):
            raise ValueError(f"spectrum must satisfy 1 <= e2 <= e3 <= e4, got {self}")

    def e(self, i: int):
        """Spectrum value ``e_i``; ``e_1`` is 1."""
        return (1.0, self.e2, self.e3, self.e4)[i - 1]


def _triples(case) -> list[tuple[int, int, int]]:
    triples = getattr(case, "triples", case)
    out = []
    for t in triples:
        p, q, r = (t.p, t.q, t.r) if hasattr(t, "p") else t
        out.append((p, q, r))
    return out


def e_max(pt: SpectrumPoint):
    """``min(e4, E_CAP)`` in the kind of ``pt``."""
    return minimum(pt.e4, E_CAP)


class _AreaTerms:
    """Memoised pieces of the cusp-area bound at one point.

    Radii are built once per index so that equal-index overlaps hand the same
    object to :func:`overlap_approx` (which then uses the equal-radius form).
    """

    def __init__(self, pt: SpectrumPoint, em=None):
        self.pt = pt
        self.em = e_max(pt) if em is None else em
        self._inv = {1: 1.0}
        self._radius = {}
        self._l = {}

    def inv(self, i):
        if i not in self._inv:
            self._inv[i] = 1.0 / self.pt.e(i)
        return self._inv[i]

    def radius(self, i):
        if i not in self._radius:
            self._radius[i] = self.em * 0.5 if i == 1 else self.em * (self.inv(i) - 0.5)
        return self._radius[i]

    def l(self, i, j, k):
        key = (min(i, j), max(i, j), k)
        if key not in self._l:
            i, j, k = key
            pt = self.pt
            if i == 1 and j == 1:
                gap = pt.e(k)
            elif i == 1:
                gap = pt.e(k) * self.inv(j)
            else:
                gap = pt.e(k) / (pt.e(i) * pt.e(j))
            tangent = self.em * ((self.inv(i) + self.inv(j)) - 1.0)
            c = minimum(gap, tangent)
            self._l[key] = overlap_approx(self.radius(i), self.radius(j), c)
        return self._l[key]

    def a0(self):
        two_pi = 2 * constant("pi", self.em)
        r1, r2, r3 = self.radius(1), self.radius(2), self.radius(3)
        return two_pi * ((r1 * r1 + r2 * r2) + r3 * r3)

    def overlap_sum(self, case):
        total = None
        for i, j, k in _triples(case):
            term = (self.l(i, j, k) + self.l(j, k, i)) + self.l(k, i, j)
            total = term if total is None else total + term
        return total


def a0(pt: SpectrumPoint):
    """Total area of the three orthoclass disk families,
    ``sum_i 2 pi (e_max (1/e_i - 1/2))^2`` over ``i = 1, 2, 3``."""
    return _AreaTerms(pt).a0()


def l_term(i: int, j: int, k: int, pt: SpectrumPoint):
    """Overlap bound for the ``O(i)``/``O(j)`` disks of a triple whose third
    pair lies in ``O(k)``; centers are ``min(e_k/(e_i e_j), a + b)`` apart."""
    for idx in (i, j, k):
        if idx not in (1, 2, 3):
            raise ValueError(f"triple indices must lie in 1..3, got {(i, j, k)}")
    return _AreaTerms(pt).l(i, j, k)


def _log_term(pt: SpectrumPoint, em):
    pi = constant("pi", em)
    e2, e3 = pt.e2, pt.e3
    em2 = em * em
    inner = (1.0 + 1.0 / (e2 * e2)) + 1.0 / (e3 * e3)
    e23 = e2 * e3
    ratio = (e23 * e23) / ((em2 * em2) * em2)
    return pi * ((-3.0 + em2 * inner) + log(ratio))


def f1(case, pt: SpectrumPoint, em=None):
    """Cusp-area volume bound.

    ``(e_max^2/2) (A0 - S) - pi(-3 + e_max^2 (1 + e2^-2 + e3^-2)
    + log(e2^2 e3^2 / e_max^6))`` where ``S`` sums, over the triples of
    ``case``, the three overlap bounds ``l`` of each triple.

    ``case`` is a :class:`~momcert.cases.CaseSpec` or any iterable of index
    triples.  ``em`` overrides ``e_max`` (the certifier passes a constant
    when the whole box lies above the cap).
    """
    terms = _AreaTerms(pt, em)
    em = terms.em
    area = terms.a0()
    overlaps = terms.overlap_sum(case)
    if overlaps is not None:
        area = area - overlaps
    return ((em * em) * area) * 0.5 - _log_term(pt, em)


def f1_via_lessvol(case, pt: SpectrumPoint):
    """:func:`f1` rebuilt from :func:`~momcert.geometry.lessvol` (used to
    cross-check the closed form)."""
    terms = _AreaTerms(pt)
    em = terms.em
    area = terms.a0()
    overlaps = terms.overlap_sum(case)
    if overlaps is not None:
        area = area - overlaps
    cut = (lessvol(1.0 if not isinstance(em, mpmath.mpf) else mpmath.mpf(1), em)
           + lessvol(pt.e2, em)) + lessvol(pt.e3, em)
    return ((em * em) * area) * 0.5 - 2 * cut


def f2_bonus(pt: SpectrumPoint):
    """Extra volume from the ``O(4)`` disks when the gate holds.

    ``e4^2 (pi b^2 - overlap_approx(a, b, c))`` with ``a = e4/2``,
    ``b = 1/(e4 e2) - e4/e2 + e4/2`` and ``c = 1/e4``.  Only meaningful where
    :func:`gate_holds` is true.
    """
    e2, e4 = pt.e2, pt.e4
    pi = constant("pi", e4)
    a = e4 * 0.5
    inv4 = 1.0 / e4
    b = (inv4 - e4) / e2 + a
    return (e4 * e4) * (pi * (b * b) - overlap_approx(a, b, inv4))


def f2(case, pt: SpectrumPoint):
    return f1(case, pt) + f2_bonus(pt)


def gate_holds(pt: SpectrumPoint):
    """Whether the bonus applies: ``e4 <= E_CAP`` and ``e2 + 1 >= e4^2``.

    For jets the answer is rigorous over the whole box (a bool or bool
    array); plain and precise kinds evaluate the inequalities directly.
    """
    e2, e4 = pt.e2, pt.e4
    if isinstance(e4, Jet) or isinstance(e2, Jet):
        e4j = e4 if isinstance(e4, Jet) else Jet(float(e4))
        _, hi4 = jet_range(e4j)
        lo_slack, _ = jet_range((e2 + 1.0) - e4j * e4j)
        return (hi4 <= E_CAP) & (lo_slack >= 0)
    return (e4 <= E_CAP) & (e2 + 1 >= e4 * e4)


def objective(case, pt: SpectrumPoint):
    """``max(f1, f2)`` where the gate allows f2, else ``f1`` (plain/precise)."""
    if kind_of(pt.e2, pt.e3, pt.e4) is ScalarKind.JET:
        raise TypeError("objective is a point evaluation; use the certifier for jets")
    v1 = f1(case, pt)
    gate = gate_holds(pt)
    if isinstance(gate, np.ndarray):
        e2, e3, e4 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (pt.e2, pt.e3, pt.e4)))
        out = np.array(np.broadcast_to(v1, e2.shape), dtype=float)
        if np.any(gate):
            sub = SpectrumPoint(e2[gate], e3[gate], e4[gate])
            out[gate] = maximum(out[gate], out[gate] + f2_bonus(sub))
        return out
    if not gate:
        return v1
    return maximum(v1, v1 + f2_bonus(pt))


# ---------------------------------------------------------------------------
# single-configuration bounds (exact lens areas)

def _pi_term(x):
    """``x^2 - 1 - 2 log x``, twice the volume cut by a unit ball."""
    return x * x - 1 - 2 * log(x)


def vol_lb_first(e2):
    """Packing bound from the ``O(2)`` horoballs alone:
    ``e2^4 sqrt(3)/2 - pi (e2^2 - 1 - 2 log e2)``."""
    if kind_of(e2) is ScalarKind.JET:
        raise TypeError("vol_lb_first is a plain/precise evaluation")
    if np.any(np.asarray(e2, dtype=float) < 1):
        raise ValueError("e2 must be at least 1")
    return e2**4 * constant("sqrt3", e2) / 2 - constant("pi", e2) * _pi_term(e2)


def vol_lb_122_family(variant: str, e2, e3):
    """Volume bounds for the four small-triple configurations.

    ``variant`` is one of

    ``no112``
        no ``(1,1,2)`` triple: ``e2^2 e3^2 sqrt(3)/2 - pi(e2^2 - 1 - 2 log e2)``.
    ``one122``
        at most one ``(1,2,2)`` triple, ``e2 <= 1.4751``, ``e3 <= 1.8135``.
    ``one112``
        exactly one ``(1,1,2)`` triple.
    ``one112_refined``
        one ``(1,1,2)`` and no ``(1,2,2)`` triple.

    Raises :class:`~momcert.geometry.GeometryDomainError` when a lens
    configuration is impossible, which signals the variant's side conditions
    are not met.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if kind_of(e2, e3) is ScalarKind.JET:
        raise TypeError("the single-configuration bounds use exact lens areas (no jets)")
    pi = constant("pi", e2, e3)
    if variant == "no112":
        return e2 * e2 * e3 * e3 * constant("sqrt3", e2, e3) / 2 - pi * _pi_term(e2)
    half = e3 / 2
    if variant == "one112":
        area = 2 * pi * half * half - overlap_area(half, half, e2)
        return area * e2 * e2 / 2 - pi * _pi_term(e2)
    r = e3 / e2 - half
    if variant == "one122":
        area = (2 * pi * half * half + 2 * pi * r * r
                - 2 * overlap_area(r, half, 1) - overlap_area(r, r, 1 / (e2 * e2)))
    else:
        area = (2 * pi * half * half + 2 * pi * r * r
                - overlap_area(half, half, e2) - 2 * overlap_area(r, half, 1 / e2))
    return area * e3 * e3 / 2 - pi * (_pi_term(e3) + _pi_term(e3 / e2))
