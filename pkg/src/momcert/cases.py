"""Triple types, geometric Mom-n detection and the maximal case list.

A collection of triples is a multiset: a type appearing twice stands for two
inequivalent triples of the same type.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import combinations, combinations_with_replacement
from typing import Iterable, Sequence

INDICES = (1, 2, 3)
# Three triples of one type always form a torus-friendly Mom-3 (their indices
# span at most three values and no type occurs exactly twice), so no
# collection free of certifiable structures repeats a type three times.  A
# cap of 3 therefore loses nothing.
MULTIPLICITY_CAP = 3


@dataclass(frozen=True, order=True)
class TripleType:
    """Unordered index triple ``(p, q, r)`` stored ascending."""

    p: int
    q: int
    r: int

    def __post_init__(self):
        p, q, r = sorted((self.p, self.q, self.r))
        for i in (p, q, r):
            if not isinstance(i, int) or not 1 <= i <= 4:
                raise ValueError(f"triple indices must be integers in 1..4, got {(self.p, self.q, self.r)}")
        if p == q == r:
            raise ValueError(f"({p},{p},{p}) triples do not exist")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    @classmethod
    def of(cls, t) -> "TripleType":
        return t if isinstance(t, TripleType) else cls(*t)

    def indices(self) -> frozenset:
        return frozenset((self.p, self.q, self.r))

    @property
    def distinct(self) -> bool:
        return len(self.indices()) == 3

    def __iter__(self):
        return iter((self.p, self.q, self.r))

    def __str__(self):
        return f"({self.p},{self.q},{self.r})"


def valid_types(indices: Sequence[int] = INDICES) -> list[TripleType]:
    """All triple types over ``indices`` in ascending order."""
    return [TripleType(*t) for t in combinations_with_replacement(sorted(indices), 3) if len(set(t)) > 1]


def _collection(coll: Iterable) -> tuple[TripleType, ...]:
    return tuple(sorted(TripleType.of(t) for t in coll))


@dataclass(frozen=True)
class CaseSpec:
    """One maximal collection, identified by its position in the case list."""

    id: int
    triples: tuple[TripleType, ...]

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(TripleType.of(t) for t in self.triples))

    def label(self) -> str:
        return ", ".join(str(t) for t in self.triples)

    def to_json(self) -> dict:
        return {"id": self.id, "triples": [list(t) for t in self.triples]}


def is_geometric_mom_n(coll: Iterable, n: int) -> bool:
    """Exactly ``n`` triples whose indices all fit in one ``n``-element set."""
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n}")
    triples = _collection(coll)
    if len(triples) != n:
        return False
    used = frozenset().union(*(t.indices() for t in triples))
    return len(used) <= n


def is_torus_friendly(coll: Iterable) -> bool:
    """A Mom-2, or a Mom-3 in which no distinct-index type occurs exactly twice.

    Raises ``ValueError`` if ``coll`` is not a geometric Mom-2 or Mom-3.
    """
    triples = _collection(coll)
    n = len(triples)
    if n not in (2, 3) or not is_geometric_mom_n(triples, n):
        raise ValueError(f"{[str(t) for t in triples]} is not a geometric Mom-2 or Mom-3")
    if n == 2:
        return True
    counts = Counter(triples)
    return not any(t.distinct and c == 2 for t, c in counts.items())


def contains_certifiable_mom(coll: Iterable) -> bool:
    """Whether some sub-multiset is a torus-friendly geometric Mom-2 or Mom-3."""
    triples = _collection(coll)
    return _contains(triples)


@lru_cache(maxsize=None)
def _contains(triples: tuple[TripleType, ...]) -> bool:
    for n in (2, 3):
        for sub in set(combinations(triples, n)):
            if is_geometric_mom_n(sub, n) and is_torus_friendly(sub):
                return True
    return False


def _load_cases() -> list[CaseSpec]:
    text = resources.files("momcert").joinpath("data/cases.json").read_text(encoding="utf-8")
    doc = json.loads(text)
    return [CaseSpec(c["id"], tuple(TripleType(*t) for t in c["triples"])) for c in doc["cases"]]


@lru_cache(maxsize=1)
def _cases_cached() -> tuple[CaseSpec, ...]:
    return tuple(_load_cases())


def the_18_cases() -> list[CaseSpec]:
    """The maximal collections, ids 1..18, read from the shipped data file."""
    return list(_cases_cached())


def get_case(case_id: int) -> CaseSpec:
    for case in _cases_cached():
        if case.id == case_id:
            return case
    raise KeyError(f"no case with id {case_id}; ids run 1..{len(_cases_cached())}")


def is_maximal(coll: Iterable, indices: Sequence[int] = INDICES) -> bool:
    """Free of certifiable structures, and every one-triple extension is not."""
    triples = _collection(coll)
    if _contains(triples):
        return False
    return all(_contains(_collection(triples + (t,))) for t in valid_types(indices))


def verify_maximality(case) -> bool:
    """:func:`is_maximal` for a :class:`CaseSpec` (or any collection)."""
    return is_maximal(getattr(case, "triples", case))


def _is_submultiset(small, big) -> bool:
    need = Counter(small)
    have = Counter(big)
    return all(have[t] >= c for t, c in need.items())


def enumerate_collections(max_size: int, cap: int = MULTIPLICITY_CAP, indices: Sequence[int] = INDICES):
    """Every multiset of valid types of size 1..``max_size`` with no type
    repeated more than ``cap`` times."""
    types = valid_types(indices)
    for size in range(1, max_size + 1):
        for combo in combinations_with_replacement(types, size):
            if max(Counter(combo).values()) <= cap:
                yield combo


def maximal_collections(max_size: int = 5, cap: int = MULTIPLICITY_CAP) -> list[tuple[TripleType, ...]]:
    """Brute-force list of maximal collections up to ``max_size`` triples."""
    return [c for c in enumerate_collections(max_size, cap) if is_maximal(c)]


def exhaustiveness_scan(max_size: int = 4, cap: int = MULTIPLICITY_CAP) -> dict:
    """Check that every collection free of certifiable structures sits inside
    one of the listed cases.

    Returns a summary with the number of collections scanned, the free ones,
    any free collection not covered by a case, and any maximal collection
    missing from the case list.
    """
    cases = the_18_cases()
    scanned = 0
    free = 0
    uncovered = []
    for coll in enumerate_collections(max_size, cap):
        scanned += 1
        if _contains(coll):
            continue
        free += 1
        if not any(_is_submultiset(coll, case.triples) for case in cases):
            uncovered.append(coll)
    listed = {tuple(sorted(c.triples)) for c in cases}
    extra = [m for m in maximal_collections(max_size, cap) if m not in listed]
    return {
        "max_size": max_size,
        "cap": cap,
        "scanned": scanned,
        "free": free,
        "uncovered": uncovered,
        "unlisted_maximal": extra,
    }
