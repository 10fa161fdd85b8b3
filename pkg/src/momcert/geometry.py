"""Closed-form horoball geometry.

All functions except :func:`overlap_area` and :func:`mc_overlap_oracle` accept
any scalar kind (see :mod:`momcert.scalars`).  ``overlap_area`` needs ``acos``
and square roots, which are deliberately not offered for jets: their vertical
tangents at +-1 blow up jet error terms.  Rigorous code uses the polynomial
majorant :func:`overlap_approx` instead.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

from .jets import Jet
from .scalars import ScalarKind, acos, constant, kind_of, log, sqrt

# plain/precise radii this close are treated as equal
EQUAL_RADII_RTOL = 2.0**-40


class GeometryDomainError(ValueError):
    """Arguments outside the region where a formula is valid."""


def _check_positive(name, *xs):
    for x in xs:
        if isinstance(x, Jet):
            continue
        if not np.all(np.asarray(x, dtype=float) > 0):
            raise GeometryDomainError(f"{name}: arguments must be positive, got {x!r}")


def lessvol(a, b):
    """Volume cut from a height-``1/b`` horoball at infinity by the
    half-space under a radius-``1/a`` hemisphere, for ``0 < a <= b``.
    """
    _check_positive("lessvol", a, b)
    pi = constant("pi", a, b)
    return pi * (b * b / (2 * (a * a)) - 0.5 + log(a / b))


def lens_f(x):
    """``acos(x) - x*sqrt(1 - x^2)``: the exact lens-area profile."""
    if kind_of(x) is ScalarKind.PLAIN:
        x = np.clip(x, -1.0, 1.0)
    elif kind_of(x) is ScalarKind.PRECISE:
        x = max(min(x, mpmath.mpf(1)), mpmath.mpf(-1))
    return acos(x) - x * sqrt(1 - x * x)


def lens_g(x):
    """Quintic majorant of :func:`lens_f` on ``[0, 1]``.

    ``g(x) = (5/3 - pi/2) x^5 + x^3/3 - 2x + pi/2``, evaluated in Horner form.
    """
    k5 = constant("g_quintic", x)
    third = constant("third", x)
    half_pi = constant("half_pi", x)
    x2 = x * x
    return x * (x2 * (k5 * x2 + third) - 2) + half_pi


def _same_radius(a, b):
    if isinstance(a, Jet) or isinstance(b, Jet):
        return a is b
    if a is b:
        return True
    return np.abs(a - b) <= EQUAL_RADII_RTOL * np.maximum(np.abs(a), np.abs(b))


def _two_disk(profile, a, b, c):
    same = _same_radius(a, b)
    if same is True or (isinstance(same, (bool, np.bool_)) and same):
        return 2 * (a * a) * profile(c / (2 * a))
    if same is False or (isinstance(same, (bool, np.bool_)) and not same):
        return _general(profile, a, b, c)
    # plain arrays with mixed equal/unequal entries
    with np.errstate(divide="ignore", invalid="ignore"):
        eq = 2 * (a * a) * profile(c / (2 * a))
        ne = _general(profile, a, b, c)
    return np.where(same, eq, ne)


def _general(profile, a, b, c):
    a2 = a * a
    b2 = b * b
    c2 = c * c
    xa = (a2 - b2 + c2) / (2 * (a * c))
    xb = (b2 - a2 + c2) / (2 * (b * c))
    return a2 * profile(xa) + b2 * profile(xb)


def overlap_area(a, b, c):
    """Exact area of the intersection of disks of radii ``a``, ``b`` whose
    centers are ``c`` apart; requires ``|a - b| <= c <= a + b``.

    Plain and precise kinds only.
    """
    if isinstance(a, Jet) or isinstance(b, Jet) or isinstance(c, Jet):
        raise TypeError("overlap_area has no jet version; use overlap_approx")
    _check_positive("overlap_area", a, b)
    if kind_of(a, b, c) is ScalarKind.PRECISE:
        slack = mpmath.mpf(2) ** (-mpmath.mp.prec + 8) * (a + b)
    else:
        slack = 1e-12 * (np.abs(a) + np.abs(b))
    lo_ok = np.all(np.abs(a - b) <= c + slack)
    hi_ok = np.all(c <= a + b + slack)
    if not (lo_ok and hi_ok):
        raise GeometryDomainError(f"overlap_area: disks disjoint or nested (a={a}, b={b}, c={c})")
    return _two_disk(lens_f, a, b, c)


def overlap_approx(a, b, c):
    """Polynomial upper bound for :func:`overlap_area`.

    Valid as a bound for ``|a - b| <= c <= a + b``.  Outside that range the
    polynomial is still evaluated; for ``c > a + b`` the value may go
    negative, so callers clamp ``c`` to ``a + b`` first.  In jet kind the
    equal-radius form is used only when ``a`` and ``b`` are the same object;
    the general form is continuous at ``a == b`` so that is always sound.
    """
    _check_positive("overlap_approx", a, b)
    return _two_disk(lens_g, a, b, c)


def euclidean_gap(e_m, e_n, e_r):
    """Distance between orthocenters on the cusp torus, ``e_r/(e_m e_n)``."""
    _check_positive("euclidean_gap", e_m, e_n, e_r)
    return e_r / (e_m * e_n)


def cosh_line_distance(e_h, e_j, e_k, e_l, e_m, e_n):
    """``cosh`` of the distance between the lines joining the centers of
    A, C and of B, D, from the Euclidean spectrum values of the six pairs:
    ``(e_h e_k + e_j e_l) / (e_m e_n)``.
    """
    _check_positive("cosh_line_distance", e_h, e_j, e_k, e_l, e_m, e_n)
    return (e_h * e_k + e_j * e_l) / (e_m * e_n)


def line_distance(*spectrum):
    """The distance ``x`` itself (plain/precise), via ``acosh``."""
    ch = cosh_line_distance(*spectrum)
    if isinstance(ch, mpmath.mpf):
        return mpmath.acosh(ch)
    if ch < 1:
        raise GeometryDomainError(f"cosh value {ch} < 1 has no real distance")
    return math.acosh(ch)


def mc_overlap_oracle(a: float, b: float, c: float, n: int = 10**6, seed: int = 0):
    """Monte-Carlo lens area with its standard error.

    Samples uniformly in the smaller disk and counts hits in the larger one.
    Test oracle only; returns ``(estimate, standard_error)``.
    """
    if n < 10**4:
        raise ValueError("use at least 10**4 samples")
    if not (abs(a - b) <= c <= a + b):
        raise GeometryDomainError(f"mc_overlap_oracle: invalid configuration ({a}, {b}, {c})")
    small, big = (b, a) if b <= a else (a, b)
    rng = np.random.default_rng(seed)
    radius = small * np.sqrt(rng.random(n))
    theta = rng.random(n) * (2 * np.pi)
    # small disk centered at (c, 0), big disk at the origin
    x = c + radius * np.cos(theta)
    y = radius * np.sin(theta)
    hits = np.count_nonzero(x * x + y * y <= big * big)
    p = hits / n
    area = np.pi * small * small
    return area * p, area * math.sqrt(p * (1 - p) / n)
