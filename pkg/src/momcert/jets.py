"""Self-validating affine 1-jet arithmetic.

A jet ``(f0; f1, f2, f3; fe)`` stands for every function ``f`` on the cube
``[-1, 1]**3`` with ``|f(x) - (f0 + f1*x1 + f2*x2 + f3*x3)| <= fe``.  Every
operation below returns a jet containing the pointwise result for all members
of its operands, assuming IEEE binary64 arithmetic in round-to-nearest mode.

Fields may be Python floats (a single jet) or equally shaped numpy arrays (a
batch of independent jets evaluated together).  A single jet raises
:class:`JetDomainError` on a domain violation or a non-finite field; a batch
marks the offending entries NaN instead and keeps going, so that one bad box
does not stop the evaluation of the others.

Error padding follows one scheme throughout::

    h_eps = (1 + n*EPS) * (eps_taylor + eps_float)

``eps_taylor`` bounds the truncation (the non-affine part of the exact result
plus the operands' own error radii), ``eps_float`` bounds the rounding error
made while computing ``h0 .. h3``, and the factor ``1 + n*EPS`` covers the
rounding of the error sum itself.  Every quantity in an error sum is
non-negative, so a chain of ``d`` rounded operations loses at most a factor
``(1 - EPS/2)**d``; each ``n`` below satisfies ``2*n >= d + 1`` with room to
spare.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np

__all__ = [
    "EPS",
    "UNIT",
    "ETA",
    "MachineModel",
    "MACHINE",
    "Jet",
    "JetDomainError",
    "jet_from_interval",
    "jet_from_intervals",
    "jet_add",
    "jet_neg",
    "jet_sub",
    "jet_scale",
    "jet_mul",
    "jet_recip",
    "jet_div",
    "jet_log",
    "jet_max0",
    "jet_min",
    "jet_max",
    "jet_range",
    "const_enclosure",
    "enclose",
    "LogConfig",
]

EPS = 2.0**-52
UNIT = EPS / 2  # unit roundoff of round-to-nearest
# absolute slack per operation for gradual underflow (each subnormal rounding
# errs by at most 2**-1075)
ETA = 2.0**-1022

# padding multipliers, n in (1 + n*EPS)
_N_ADD = 3
_N_SCALE = 4
_N_MUL = 12
_N_RECIP = 16
_N_RANGE = 4


class MachineModel:
    """Granularity constant of the arithmetic kernel."""

    def __init__(self, eps: float = EPS, rounding: str = "nearest-even", name: str = "binary64"):
        if not eps > 0 or not 1.0 + eps > 1.0:
            raise ValueError("EPS must be positive with 1 + EPS representable above 1")
        self.eps = eps
        self.rounding = rounding
        self.name = name

    def describe(self) -> dict:
        return {"format": self.name, "eps": self.eps, "eps_hex": float.hex(self.eps), "rounding": self.rounding}


MACHINE = MachineModel()


class JetDomainError(ArithmeticError):
    """An operation was applied outside its rigorously verified domain."""


class LogConfig:
    """Tunable constants of :func:`jet_log`.

    ``base`` is the range-reduction divisor (exactly representable), and
    ``degree`` the Taylor degree at 1.  The target window only steers the
    choice of reduction count; the remainder bound always uses the actual
    rigorous range, so a wide operand stays sound, just loose.
    """

    base = 1.125
    degree = 12
    window = (0.9, 1.13)
    max_step = 16  # 9**16 < 2**53, so (9/8)**k is exact for |k| <= 16


_NUMBER = (int, float, np.integer, np.floating)


def _is_batch(*xs) -> bool:
    return any(isinstance(x, np.ndarray) and x.ndim > 0 for x in xs)


def _scalar(x):
    if (isinstance(x, np.ndarray) and x.ndim == 0) or isinstance(x, np.floating):
        return float(x)
    return x


class Jet:
    """An affine 1-jet over three noise variables.

    Arithmetic operators accept other jets and Python numbers.  A number is
    taken as an exact constant, so only exactly representable literals
    (``0.5``, ``2``, ``1.5152`` read as its double) may be mixed in; anything
    else must go through :func:`enclose` first.
    """

    __slots__ = ("f0", "f1", "f2", "f3", "fe")
    __array_ufunc__ = None  # numpy scalars defer to the reflected operators

    def __init__(self, f0, f1=0.0, f2=0.0, f3=0.0, fe=0.0, *, check=True):
        self.f0 = _scalar(f0)
        self.f1 = _scalar(f1)
        self.f2 = _scalar(f2)
        self.f3 = _scalar(f3)
        self.fe = _scalar(fe)
        if check and not self.is_batch:
            if not all(math.isfinite(v) for v in (self.f0, self.f1, self.f2, self.f3, self.fe)):
                raise JetDomainError(f"non-finite jet field in {self!r}")
            if self.fe < 0:
                raise ValueError("jet error radius must be non-negative")

    @property
    def is_batch(self) -> bool:
        return _is_batch(self.f0, self.f1, self.f2, self.f3, self.fe)

    @property
    def fields(self):
        return (self.f0, self.f1, self.f2, self.f3, self.fe)

    @property
    def linear(self):
        return (self.f1, self.f2, self.f3)

    def __repr__(self):
        if self.is_batch:
            return f"Jet(<batch of {np.shape(self.f0)}>)"
        return f"Jet({self.f0!r}; {self.f1!r}, {self.f2!r}, {self.f3!r}; {self.fe!r})"

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.fields, other.fields))

    __hash__ = None

    def valid(self):
        """Boolean (array) telling which entries carry finite fields."""
        ok = np.isfinite(self.f0) & np.isfinite(self.fe)
        for v in self.linear:
            ok = ok & np.isfinite(v)
        return ok

    def take(self, index) -> "Jet":
        """Sub-batch selected by a mask or index array."""
        def pick(v):
            return v[index] if isinstance(v, np.ndarray) and v.ndim > 0 else v
        return Jet(*(pick(v) for v in self.fields), check=False)

    def range(self):
        return jet_range(self)

    def contains(self, value: float) -> bool:
        lo, hi = jet_range(self)
        return bool(np.all((lo <= value) & (value <= hi)))

    def __add__(self, other):
        if isinstance(other, Jet):
            return jet_add(self, other)
        if isinstance(other, _NUMBER):
            return _add_const(self, float(other))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return jet_neg(self)

    def __sub__(self, other):
        if isinstance(other, Jet):
            return jet_sub(self, other)
        if isinstance(other, _NUMBER):
            return _add_const(self, -float(other))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _NUMBER):
            return _add_const(jet_neg(self), float(other))
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        if isinstance(other, _NUMBER):
            return jet_scale(self, float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return jet_div(self, other)
        if isinstance(other, _NUMBER):
            return _div_const(self, float(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _NUMBER):
            return jet_scale(jet_recip(self), float(other))
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 1:
            return NotImplemented
        result = self
        for _ in range(n - 1):
            result = jet_mul(result, self)
        return result


def _finish(h0, h1, h2, h3, he) -> Jet:
    return Jet(h0, h1, h2, h3, he)


def _poison(jet: Jet, bad) -> Jet:
    """Mark entries selected by ``bad`` invalid (NaN) in a batch."""
    nan = np.nan
    return Jet(*(np.where(bad, nan, v) for v in jet.fields), check=False)


def _select(mask, A: Jet, B: Jet) -> Jet:
    """Entrywise ``A if mask else B``; a scalar mask picks a whole jet."""
    if not _is_batch(mask):
        return A if bool(mask) else B
    return Jet(*(np.where(mask, a, b) for a, b in zip(A.fields, B.fields)), check=False)


def _l1(f1, f2, f3):
    return (np.abs(f1) + np.abs(f2)) + np.abs(f3)


# ---------------------------------------------------------------------------
# construction

def jet_from_interval(axis: int, lo: float, hi: float) -> Jet:
    """Affine bijection from ``[-1, 1]`` on noise ``axis`` onto ``[lo, hi]``.

    When the midpoint and half-width are exact the error radius is zero;
    otherwise it is set just large enough to cover the rounding.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, not {axis!r}")
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("interval endpoints must be finite")
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return jet_from_intervals(axis, lo, hi)


def _two_sum_err(a, b, s):
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def jet_from_intervals(axis: int, lo, hi) -> Jet:
    """Vectorised :func:`jet_from_interval` (no argument checks beyond shape)."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    s = lo + hi
    d = hi - lo
    c = 0.5 * s
    r = 0.5 * d
    exact = (_two_sum_err(lo, hi, s) == 0) & (_two_sum_err(hi, -lo, d) == 0) & (c + c == s) & (r + r == d)
    # |c - c*| + |r - r*| <= 2u(|c| + r) when not exact
    fe = np.where(exact, 0.0, (4 * UNIT) * (np.abs(c) + r) + ETA)
    zero = np.zeros_like(c)
    lin = [zero, zero, zero]
    lin[axis - 1] = r
    return Jet(c, *lin, fe)


# ---------------------------------------------------------------------------
# constants

_CONST_CACHE: dict = {}


def enclose(value) -> Jet:
    """Constant jet enclosing a real given exactly (Fraction, int, decimal
    string) or as an mpmath number computed well beyond double precision."""
    key = (type(value).__name__, str(value))
    if key in _CONST_CACHE:
        return _CONST_CACHE[key]
    if isinstance(value, (int, str)):
        value = Fraction(value)
    if isinstance(value, Fraction):
        center = float(value)  # correctly rounded
        exact = Fraction(center) == value
    else:
        v = mpmath.mpf(value)
        center = float(v)
        exact = mpmath.mpf(center) == v
    jet = Jet(center, 0.0, 0.0, 0.0, 0.0 if exact else math.ulp(center))
    _CONST_CACHE[key] = jet
    return jet


CONSTANT_VALUES = {
    "pi": lambda: +mpmath.pi,
    "half_pi": lambda: mpmath.pi / 2,
    "sqrt3": lambda: mpmath.sqrt(3),
    "log_9_8": lambda: mpmath.log(mpmath.mpf(9) / 8),
    "third": lambda: mpmath.mpf(1) / 3,
    "g_quintic": lambda: mpmath.mpf(5) / 3 - mpmath.pi / 2,
}


def const_enclosure(name: str) -> Jet:
    """Rigorous constant jet for one of the names in :data:`CONSTANT_VALUES`.

    The center is the double nearest the constant and the radius one unit in
    its last place.
    """
    if name not in CONSTANT_VALUES:
        raise KeyError(f"unknown constant {name!r}; expected one of {sorted(CONSTANT_VALUES)}")
    if name in _CONST_CACHE:
        return _CONST_CACHE[name]
    with mpmath.workprec(320):
        v = CONSTANT_VALUES[name]()
        center = float(v)
    jet = Jet(center, 0.0, 0.0, 0.0, math.ulp(center))
    _CONST_CACHE[name] = jet
    return jet


# ---------------------------------------------------------------------------
# linear operations

def jet_add(F: Jet, G: Jet) -> Jet:
    h0 = F.f0 + G.f0
    h1 = F.f1 + G.f1
    h2 = F.f2 + G.f2
    h3 = F.f3 + G.f3
    et = F.fe + G.fe
    ef = (EPS / 2) * ((np.abs(h0) + np.abs(h1)) + (np.abs(h2) + np.abs(h3))) + ETA
    he = (1 + _N_ADD * EPS) * (et + ef)
    return _finish(h0, h1, h2, h3, he)


def jet_neg(F: Jet) -> Jet:
    return Jet(-F.f0, -F.f1, -F.f2, -F.f3, F.fe, check=False)


def jet_sub(F: Jet, G: Jet) -> Jet:
    return jet_add(F, jet_neg(G))


def _add_const(F: Jet, c) -> Jet:
    h0 = F.f0 + c
    ef = UNIT * np.abs(h0) + ETA
    he = (1 + _N_ADD * EPS) * (F.fe + ef)
    return _finish(h0, F.f1, F.f2, F.f3, he)


def jet_scale(F: Jet, c) -> Jet:
    """Multiply by an exactly representable constant (scalar or per-entry)."""
    h0 = c * F.f0
    h1 = c * F.f1
    h2 = c * F.f2
    h3 = c * F.f3
    et = np.abs(c) * F.fe
    ef = UNIT * ((np.abs(h0) + np.abs(h1)) + (np.abs(h2) + np.abs(h3))) + ETA
    he = (1 + _N_SCALE * EPS) * (et + ef)
    return _finish(h0, h1, h2, h3, he)


def _div_const(F: Jet, c) -> Jet:
    if not _is_batch(c) and c == 0:
        raise JetDomainError("division by zero constant")
    h0 = F.f0 / c
    h1 = F.f1 / c
    h2 = F.f2 / c
    h3 = F.f3 / c
    et = F.fe / np.abs(c)
    ef = UNIT * ((np.abs(h0) + np.abs(h1)) + (np.abs(h2) + np.abs(h3))) + ETA
    he = (1 + _N_SCALE * EPS) * (et + ef)
    return _finish(h0, h1, h2, h3, he)


# ---------------------------------------------------------------------------
# products and quotients

def jet_mul(F: Jet, G: Jet) -> Jet:
    """Product; quadratic cross terms are folded into the error radius."""
    f0, g0 = F.f0, G.f0
    h0 = f0 * g0
    p1, q1 = f0 * G.f1, g0 * F.f1
    p2, q2 = f0 * G.f2, g0 * F.f2
    p3, q3 = f0 * G.f3, g0 * F.f3
    h1 = p1 + q1
    h2 = p2 + q2
    h3 = p3 + q3
    a = _l1(F.f1, F.f2, F.f3)
    b = _l1(G.f1, G.f2, G.f3)
    et = (a * b + F.fe * ((np.abs(g0) + b) + G.fe)) + G.fe * (np.abs(f0) + a)
    ef = UNIT * (
        ((np.abs(h0) + np.abs(h1)) + (np.abs(h2) + np.abs(h3)))
        + ((np.abs(p1) + np.abs(q1)) + (np.abs(p2) + np.abs(q2)) + (np.abs(p3) + np.abs(q3)))
    ) + 8 * ETA
    he = (1 + _N_MUL * EPS) * (et + ef)
    return _finish(h0, h1, h2, h3, he)


def jet_recip(G: Jet) -> Jet:
    """Reciprocal by linearisation at the center.

    With ``G = g0 (1 + u)`` and ``|u| <= r < 1``, ``1/(1+u) = 1 - u + R`` where
    ``|R| <= r**2 / (1 - r)``.  Higher geometric-series terms would land in
    the error radius anyway, so degree one is as tight as affine jets allow.
    """
    g0 = G.f0
    ag0 = np.abs(g0)  # numpy scalar even for float input, so 0 divides quietly
    spread = (np.abs(G.f1) + np.abs(G.f2)) + (np.abs(G.f3) + G.fe)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_up = (spread / ag0) * (1 + 4 * EPS)
        bad = ~(r_up < 1.0)
        if not _is_batch(bad) and bad:
            raise JetDomainError(f"reciprocal of a jet whose range may contain 0: {G!r}")
        h0 = 1.0 / g0
        q = h0 * h0
        h1 = -G.f1 * q
        h2 = -G.f2 * q
        h3 = -G.f3 * q
        rem = (r_up * r_up) / (1.0 - r_up)
        et = G.fe * q + rem * np.abs(h0)
    ef = UNIT * (2 * np.abs(h0) + 5 * ((np.abs(h1) + np.abs(h2)) + np.abs(h3))) + 4 * ETA
    he = (1 + _N_RECIP * EPS) * (et + ef)
    out = Jet(h0, h1, h2, h3, he, check=not _is_batch(bad))
    return _poison(out, bad) if _is_batch(bad) else out


def jet_div(F: Jet, G: Jet) -> Jet:
    """Quotient ``F * (1/G)``; requires the range of ``G`` to exclude zero."""
    return jet_mul(F, jet_recip(G))


# ---------------------------------------------------------------------------
# range, max0, min

def jet_range(F: Jet):
    """Rigorous ``(lo, hi)`` enclosing every value of every member."""
    t = _l1(F.f1, F.f2, F.f3) + F.fe
    pad = (_N_RANGE * EPS) * (np.abs(F.f0) + t) + ETA
    lo = (F.f0 - t) - pad
    hi = (F.f0 + t) + pad
    return _scalar(lo), _scalar(hi)


def jet_max0(F: Jet) -> Jet:
    """Enclosure of ``max(f, 0)``.

    Sign-definite operands come back unchanged (positive) or as the zero jet
    (negative).  Otherwise the result is ``(s; 0, 0, 0; s)`` with ``s`` half
    the rigorous upper end of the range, padded by ``1 + 3*EPS``.
    """
    lo, hi = jet_range(F)
    s = 0.5 * (1 + 3 * EPS) * hi
    if not F.is_batch:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise JetDomainError("max0 of a non-finite jet")
        if lo > 0:
            return F
        if hi < 0:
            return Jet(0.0)
        return Jet(s, 0.0, 0.0, 0.0, s)
    pos = lo > 0
    neg = hi < 0
    mid = ~(pos | neg)
    zero = 0.0
    out = Jet(
        np.where(pos, F.f0, np.where(neg, zero, s)),
        np.where(pos, F.f1, zero),
        np.where(pos, F.f2, zero),
        np.where(pos, F.f3, zero),
        np.where(pos, F.fe, np.where(neg, zero, s)),
        check=False,
    )
    return _poison(out, ~F.valid() | (mid & ~np.isfinite(s)))


def jet_min(F: Jet, G: Jet) -> Jet:
    """``min(f, g) = f - max(f - g, 0)``."""
    return jet_sub(F, jet_max0(jet_sub(F, G)))


def jet_max(F: Jet, G: Jet) -> Jet:
    """``max(f, g) = g + max(f - g, 0)``."""
    return jet_add(G, jet_max0(jet_sub(F, G)))


# ---------------------------------------------------------------------------
# logarithm

_LOG_COEFFS: list | None = None
_LOG_THRESHOLDS: np.ndarray | None = None
_LOG_K_MIN = -6000


def _log_coeffs():
    global _LOG_COEFFS
    if _LOG_COEFFS is None:
        _LOG_COEFFS = [
            enclose(Fraction((-1) ** (k + 1), k)) for k in range(1, LogConfig.degree + 1)
        ]
    return _LOG_COEFFS


def _reduction_count(center):
    """Integer k with ``center / base**k`` close to 1 (heuristic, deterministic)."""
    global _LOG_THRESHOLDS
    if _LOG_THRESHOLDS is None:
        ks = np.arange(_LOG_K_MIN, -_LOG_K_MIN)
        with np.errstate(over="ignore", under="ignore"):
            _LOG_THRESHOLDS = np.array([math.exp((k + 0.5) * math.log(LogConfig.base)) for k in ks])
    idx = np.searchsorted(_LOG_THRESHOLDS, center, side="right")
    return idx + _LOG_K_MIN


def jet_log(F: Jet) -> Jet:
    """Natural logarithm of a jet with rigorously positive range.

    Reduces by exact powers of 9/8 until the center is near 1, then applies
    the degree-12 Taylor polynomial of ``log(1 + u)`` in jet arithmetic with
    the alternating-series remainder ``r**13 / (13 (1 - r))`` folded into the
    error, and finally adds back ``k * log(9/8)``.
    """
    batch = F.is_batch
    lo, _ = jet_range(F)
    if not batch:
        if not lo > 0:
            raise JetDomainError(f"log of a jet whose range is not positive: {F!r}")
        bad = False
    else:
        bad = ~(lo > 0) | ~F.valid()
        safe = np.where(bad, 1.0, F.f0)
        F = Jet(safe, *(np.where(bad, 0.0, v) for v in (F.f1, F.f2, F.f3, F.fe)), check=False)

    k = _reduction_count(F.f0)
    k_total = np.asarray(k, dtype=np.float64)
    remaining = np.asarray(k, dtype=np.int64)
    G = F
    step_max = LogConfig.max_step
    # entries needing no step are left untouched so that a batch entry never
    # depends on its neighbours
    while np.any(remaining != 0):
        step = np.clip(remaining, -step_max, step_max)
        up = np.where(step > 0, step, 0)
        down = np.where(step < 0, -step, 0)
        if np.any(up):
            G = _select(up > 0, _div_const(G, _scalar(np.asarray(9.0**up / 8.0**up))), G)
        if np.any(down):
            G = _select(down > 0, jet_scale(G, _scalar(np.asarray(9.0**down / 8.0**down))), G)
        remaining = remaining - step

    U = _add_const(G, -1.0)
    ulo, uhi = jet_range(U)
    r = np.maximum(np.abs(ulo), np.abs(uhi))
    with np.errstate(divide="ignore", invalid="ignore"):
        too_wide = ~(r < 1.0)
        if not batch and too_wide:
            return _log_wide(F)
        n = LogConfig.degree
        coeffs = _log_coeffs()
        P = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            P = jet_add(c, jet_mul(U, P))
        P = jet_mul(U, P)
        rn = r
        for _ in range(n):
            rn = rn * r
        rem = (rn / ((n + 1) * (1.0 - r))) * (1 + 16 * EPS)
        P = Jet(P.f0, P.f1, P.f2, P.f3, (1 + 2 * EPS) * (P.fe + rem), check=False)
    if np.any(k_total != 0):
        P = _select(k_total != 0, jet_add(P, jet_scale(const_enclosure("log_9_8"), _scalar(k_total))), P)
    if batch:
        if np.any(too_wide & ~bad):
            wide = np.flatnonzero(too_wide & ~bad)
            W = _log_wide(F.take(wide))
            fields = [np.array(v, dtype=np.float64, copy=True) for v in P.fields]
            for dst, src in zip(fields, W.fields):
                dst[wide] = src
            P = Jet(*fields, check=False)
            return _poison(P, bad | (too_wide & ~P.valid()))
        return _poison(P, bad)
    return _finish(*P.fields)


def _log_wide(F: Jet) -> Jet:
    """Mean-value form for operands too wide for the Taylor window.

    With ``c = f0``, ``log v = log c + (v - c)/c + g(v)`` where ``g`` is
    concave, vanishes at ``c`` and so is largest in magnitude at an end of
    the range.  Point logs are narrow, so they go through the main path.
    """
    c = F.f0
    lo, hi = jet_range(F)
    point = Jet(c, 0.0 * c, 0.0 * c, 0.0 * c, 0.0 * c, check=not F.is_batch)
    inv_c = jet_recip(point)
    log_c = jet_log(point)
    bound = 0.0
    for end in (lo, hi):
        e = Jet(end, 0.0 * c, 0.0 * c, 0.0 * c, 0.0 * c, check=not F.is_batch)
        g = jet_sub(jet_sub(jet_log(e), log_c), jet_mul(jet_sub(e, point), inv_c))
        glo, ghi = jet_range(g)
        bound = np.maximum(bound, np.maximum(np.abs(glo), np.abs(ghi)))
    H = jet_add(log_c, jet_mul(jet_sub(F, point), inv_c))
    he = (1 + 2 * EPS) * (H.fe + bound)
    return Jet(H.f0, H.f1, H.f2, H.f3, he, check=not F.is_batch)
