"""A tour of affine jets: what they enclose and how tight they stay.

Run with ``python demos/01_jets.py``.
"""

import mpmath

import numpy as np

from momcert.jets import Jet, enclose, jet_from_interval, jet_log, jet_max0

# e2 ranging over [1.2, 1.3] becomes a jet in the first coordinate direction
e2 = jet_from_interval(1, 1.2, 1.3)
print("e2            ", e2)

# products keep their linear part, so e2 - e2 is (almost) exactly zero
sq = e2 * e2
print("e2*e2         ", sq, "range", sq.range())
print("e2*e2 - e2*e2 ", sq - sq)

# the decimal 0.1 is not a double; its enclosure carries the conversion error
print("0.1 enclosed  ", enclose("0.1"))

# log reduces by powers of 9/8 and then uses a Taylor polynomial; the affine
# form cannot follow the curvature, so the range is a little wider than the truth
L = jet_log(e2)
lo, hi = L.range()
print("log(e2) range ", (lo, hi))
with mpmath.workprec(200):
    print("true range    ", (mpmath.nstr(mpmath.log(mpmath.mpf(1.2)), 17), mpmath.nstr(mpmath.log(mpmath.mpf(1.3)), 17)))

# max(f, 0) over a jet that changes sign collapses to a constant-plus-error jet
print("max0(x)       ", jet_max0(Jet(0.0, 1.0)))

# a batch of jets evaluates entrywise; a bad entry is poisoned, not fatal
batch = Jet(np.array([2.0, 0.0, 5.0]), np.array([0.5, 1.0, 0.1]))
print("1/batch valid ", (1 / batch).valid())
