"""Scalar kinds: one formula, three arithmetics.

Geometry and volume formulas are written against the handful of functions in
this module (:func:`log`, :func:`minimum`, :func:`constant`).  They dispatch on
the type of their argument:

* plain -- Python floats or numpy arrays, ordinary binary64;
* precise -- ``mpmath.mpf`` at whatever precision is current (see
  :func:`precise`);
* jet -- :class:`~momcert.jets.Jet`, rigorous enclosures.
"""

from __future__ import annotations

import contextlib
import enum

import mpmath
import numpy as np

from . import jets
from .jets import Jet

PRECISE_BITS = 256


class ScalarKind(enum.Enum):
    PLAIN = "plain"
    PRECISE = "precise"
    JET = "jet"


def kind_of(*xs) -> ScalarKind:
    """Kind of a group of operands; jets win over mpf, mpf over floats."""
    kinds = {ScalarKind.PLAIN}
    for x in xs:
        if isinstance(x, Jet):
            return ScalarKind.JET
        if isinstance(x, mpmath.mpf):
            kinds.add(ScalarKind.PRECISE)
    return ScalarKind.PRECISE if ScalarKind.PRECISE in kinds else ScalarKind.PLAIN


@contextlib.contextmanager
def precise(bits: int = PRECISE_BITS):
    """Run a block with mpmath working at ``bits`` of precision."""
    with mpmath.workprec(bits):
        yield


def to_kind(x, kind: ScalarKind):
    """Lift a plain real into ``kind`` (jets become exact constants)."""
    if kind is ScalarKind.JET:
        return x if isinstance(x, Jet) else Jet(float(x))
    if kind is ScalarKind.PRECISE:
        return mpmath.mpf(x)
    return x


def constant(name: str, *like):
    """Named constant in the kind of the operands ``like``."""
    kind = kind_of(*like)
    if kind is ScalarKind.JET:
        return jets.const_enclosure(name)
    if kind is ScalarKind.PRECISE:
        return jets.CONSTANT_VALUES[name]()
    with mpmath.workprec(120):
        return float(jets.CONSTANT_VALUES[name]())


def log(x):
    if isinstance(x, Jet):
        return jets.jet_log(x)
    if isinstance(x, mpmath.mpf):
        return mpmath.log(x)
    return np.log(x)


def minimum(x, y):
    kind = kind_of(x, y)
    if kind is ScalarKind.JET:
        return jets.jet_min(to_kind(x, kind), to_kind(y, kind))
    if kind is ScalarKind.PRECISE:
        return min(mpmath.mpf(x), mpmath.mpf(y))
    return np.minimum(x, y)


def maximum(x, y):
    kind = kind_of(x, y)
    if kind is ScalarKind.JET:
        return jets.jet_max(to_kind(x, kind), to_kind(y, kind))
    if kind is ScalarKind.PRECISE:
        return max(mpmath.mpf(x), mpmath.mpf(y))
    return np.maximum(x, y)


def sqrt(x):
    """Square root for plain and precise kinds only (no jet version)."""
    if isinstance(x, Jet):
        raise TypeError("square roots are not available for jets")
    if isinstance(x, mpmath.mpf):
        return mpmath.sqrt(x)
    return np.sqrt(x)


def acos(x):
    """Arc cosine for plain and precise kinds only (no jet version)."""
    if isinstance(x, Jet):
        raise TypeError("acos is not available for jets")
    if isinstance(x, mpmath.mpf):
        return mpmath.acos(x)
    return np.arccos(x)


def evaluate(fn, *args, kind: ScalarKind | str = ScalarKind.PLAIN, **kwargs):
    """Evaluate ``fn`` with real ``args`` lifted into ``kind``.

    The jet kind lifts each argument to an exact constant jet.  Returns the
    result in that kind (for jets, the jet itself).
    """
    kind = ScalarKind(kind)
    if kind is ScalarKind.PRECISE:
        with precise():
            return fn(*(mpmath.mpf(a) for a in args), **kwargs)
    if kind is ScalarKind.JET:
        return fn(*(Jet(float(a)) for a in args), **kwargs)
    return fn(*(float(a) for a in args), **kwargs)
