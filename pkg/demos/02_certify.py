"""From a point value to a certificate.

At the corner (1, 1, 1) with no triples the cusp-area bound is only 3pi/4,
well below 2.848.  Triples add overlap corrections, and the certifier shows
that for every maximal case ``max(f1, f2)`` stays above 2.848 on the whole
parameter box.
"""

import math

from momcert.bounds import SpectrumPoint, f1, f2, objective
from momcert.cases import get_case
from momcert.certify import Strategy, certify_case, lower_bound_on_box

corner = SpectrumPoint(1.0, 1.0, 1.0)
print(f"f1 at the corner, no triples: {f1((), corner):.12f}  (3pi/4 = {3 * math.pi / 4:.12f})")
print(f"f2 at the corner, no triples: {f2((), corner):.12f}  (pi = {math.pi:.12f})")

case = get_case(1)
print(f"\ncase {case.id}: {case.label()}")
pt = SpectrumPoint(1.47, 1.48, 1.50)
print(f"objective at {pt}: {objective(case, pt):.6f}")

box = [(1.47, 1.4751), (1.47, 1.4751), (1.47, 1.4751)]
print(f"rigorous lower bound on {box[0]}^3: {lower_bound_on_box(case, box):.6f}")

report = certify_case(case, strategy=Strategy(depth=9))
print(f"\nadaptive search: {report.status}, {report.boxes_processed} boxes, "
      f"deepest level {report.max_depth_reached}, min bound {report.min_certified_lower_bound:.6f}")

# a threshold no bound can reach produces witness boxes instead
bad = certify_case(case, strategy=Strategy(depth=3, threshold=10.0))
print(f"threshold 10: {bad.status}, {bad.failure_count} failing leaves, first witness {bad.failures[0]}")
