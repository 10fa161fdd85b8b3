"""Dehn-filling slopes short enough to matter for a volume threshold.

If every filled slope has length ``l > 2 pi`` on a maximal cusp, the filled
manifold has volume at least ``(1 - (2 pi / l)^2)^(3/2) Vol(M)``.  Inverting
that bound gives the length below which a filling could drop under a given
threshold; :func:`enumerate_slopes` lists those slopes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

TWO_PI = 2 * math.pi
THRESHOLD = 2.848


class FillingDomainError(ValueError):
    """Inputs for which the volume bound says nothing."""


class AllSlopesAdmissible(Exception):
    """The cusped volume is not above the threshold, so no slope length
    can guarantee a filled volume above it."""

    def __init__(self, vol_m: float, threshold: float):
        super().__init__(f"volume {vol_m} does not exceed threshold {threshold}: every slope is admissible")
        self.vol_m = vol_m
        self.threshold = threshold


def fkp_volume_lb(vol_m: float, l_min: float) -> float:
    """``(1 - (2 pi / l_min)^2)^(3/2) * vol_m``; needs ``l_min > 2 pi``."""
    if not vol_m > 0:
        raise FillingDomainError(f"cusped volume must be positive, got {vol_m}")
    if not l_min > TWO_PI:
        raise FillingDomainError(f"slope length {l_min} must exceed 2*pi for the bound to apply")
    return (1 - (TWO_PI / l_min) ** 2) ** 1.5 * vol_m


def slope_cutoff(vol_m: float, threshold: float = THRESHOLD) -> float:
    """Length ``l`` with ``fkp_volume_lb(vol_m, l) == threshold``.

    Slopes longer than this give fillings of volume above ``threshold``.
    Raises :class:`AllSlopesAdmissible` when ``vol_m <= threshold``.
    """
    if not threshold > 0:
        raise FillingDomainError("threshold must be positive")
    if not vol_m > threshold:
        raise AllSlopesAdmissible(vol_m, threshold)
    return TWO_PI / math.sqrt(1 - (threshold / vol_m) ** (2 / 3))


@dataclass(frozen=True)
class CuspLattice:
    """Translation lattice of a cusp torus, spanned by two plane vectors."""

    meridian: tuple[float, float]
    longitude: tuple[float, float]

    def __post_init__(self):
        m = tuple(float(v) for v in self.meridian)
        l = tuple(float(v) for v in self.longitude)
        if len(m) != 2 or len(l) != 2 or not all(map(math.isfinite, m + l)):
            raise FillingDomainError("lattice vectors must be finite 2-vectors")
        object.__setattr__(self, "meridian", m)
        object.__setattr__(self, "longitude", l)
        if self.area <= 1e-12 * max(1.0, math.hypot(*m) * math.hypot(*l)):
            raise FillingDomainError("degenerate cusp lattice (vectors are dependent)")

    @classmethod
    def parse(cls, text: str) -> "CuspLattice":
        """From ``"mx,my,lx,ly"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise FillingDomainError(f"expected four comma-separated numbers, got {text!r}")
        mx, my, lx, ly = (float(p) for p in parts)
        return cls((mx, my), (lx, ly))

    @property
    def area(self) -> float:
        (mx, my), (lx, ly) = self.meridian, self.longitude
        return abs(mx * ly - my * lx)

    def length(self, a: int, b: int) -> float:
        x = a * self.meridian[0] + b * self.longitude[0]
        y = a * self.meridian[1] + b * self.longitude[1]
        return math.hypot(x, y)


@dataclass(frozen=True, order=True)
class Slope:
    """Coprime ``(a, b)`` in canonical sign: ``a > 0``, or ``(0, 1)``."""

    a: int
    b: int

    def __post_init__(self):
        if (self.a, self.b) == (0, 0):
            raise ValueError("(0, 0) is not a slope")
        if math.gcd(self.a, self.b) != 1:
            raise ValueError(f"slope ({self.a}, {self.b}) is not primitive")
        if not (self.a > 0 or (self.a == 0 and self.b == 1)):
            raise ValueError(f"slope ({self.a}, {self.b}) is not in canonical sign")

    @classmethod
    def canonical(cls, a: int, b: int) -> "Slope":
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        return cls(a, b)


def _coefficient_bounds(lattice: CuspLattice, cutoff: float) -> tuple[int, int]:
    # |a| = |det(v, l)| / area <= |v| |l| / area, and likewise for b
    a_max = math.floor(cutoff * math.hypot(*lattice.longitude) / lattice.area + 1e-9)
    b_max = math.floor(cutoff * math.hypot(*lattice.meridian) / lattice.area + 1e-9)
    return a_max, b_max


def enumerate_slopes(lattice: CuspLattice, cutoff: float) -> list[tuple[Slope, float]]:
    """All canonical slopes of length at most ``cutoff``, as ``(slope, length)``
    pairs sorted by length and then by ``(a, b)``."""
    if not cutoff > 0:
        raise FillingDomainError(f"cutoff must be positive, got {cutoff}")
    a_max, b_max = _coefficient_bounds(lattice, cutoff)
    out = []
    for a in range(0, a_max + 1):
        for b in range(-b_max, b_max + 1):
            if math.gcd(a, b) != 1 or (a == 0 and b != 1):
                continue
            length = lattice.length(a, b)
            if length <= cutoff:
                out.append((Slope(a, b), length))
    out.sort(key=lambda item: (item[1], item[0].a, item[0].b))
    return out


def slopes_to_csv(slopes: list[tuple[Slope, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "b", "length"])
    for slope, length in slopes:
        writer.writerow([slope.a, slope.b, f"{length:.12f}"])
    return buf.getvalue()
