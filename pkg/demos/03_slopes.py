"""Which fillings of m129 could drop below volume 2.848?

m129 has volume 3.6638 and a maximal cusp whose meridian and longitude have
lengths sqrt(2) and 2 sqrt(2) at right angles.  Slopes longer than the cutoff
give fillings of volume above 2.848, so only the listed ones need attention.
"""

import math

from momcert.fillings import CuspLattice, enumerate_slopes, fkp_volume_lb, slope_cutoff

cutoff = slope_cutoff(3.6638)
print(f"cutoff length {cutoff:.6f}, squared {cutoff ** 2:.3f}")
print(f"check: bound at the cutoff = {fkp_volume_lb(3.6638, cutoff):.12f}")

m129 = CuspLattice((math.sqrt(2), 0.0), (0.0, 2 * math.sqrt(2)))
slopes = enumerate_slopes(m129, cutoff)
print(f"{len(slopes)} slopes with 2a^2 + 8b^2 <= {cutoff ** 2:.2f}; the shortest ten:")
for s, length in slopes[:10]:
    print(f"  ({s.a:>2}, {s.b:>2})  length {length:.4f}")
