"""Branch-and-bound certification of ``max(f1, f2) > threshold``.

Boxes are stored as integer dyadic coordinates, ``(level, index)`` per axis,
over a root domain whose endpoints are multiples of ``2**-30``.  Every box
endpoint, center and half-width is then an exact double, so the jets built
from a box carry no conversion error and no box is lost or double-counted.

Lower bounds are computed in batches of jets; each batch entry is evaluated
independently, so the numbers do not depend on batching or worker count and
reports are reproducible.
"""

from __future__ import annotations

import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import jets
from .bounds import E2_MAX, E_CAP, THRESHOLD, SpectrumPoint, f1, f2_bonus, gate_holds
from .cases import CaseSpec, get_case, the_18_cases
from .jets import Jet, jet_from_intervals, jet_min, jet_range

GRID_QUANTUM = 2.0**-30
MAX_DEPTH = 20
STATUSES = ("certified", "failed", "budget-exhausted")
EMPTY_CASE = CaseSpec(0, ())


def _round_up(x: float) -> float:
    """Smallest multiple of ``GRID_QUANTUM`` at or above ``x``."""
    return math.ceil(Fraction(x) / Fraction(GRID_QUANTUM)) * GRID_QUANTUM


E2_HI = _round_up(E2_MAX)
E4_HI = _round_up(E_CAP)


# ---------------------------------------------------------------------------
# boxes

@dataclass(frozen=True)
class Domain:
    """Root box: one ``[lo, hi]`` per axis, endpoints multiples of 2**-30."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    names: tuple[str, ...] = ("e2", "e3", "e4")

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.names)):
            raise ValueError("domain bounds and names must have equal length")
        for a, b in zip(self.lo, self.hi):
            if not a <= b:
                raise ValueError(f"empty domain axis [{a}, {b}]")
            for v in (a, b):
                if Fraction(v) % Fraction(GRID_QUANTUM) != 0:
                    raise ValueError(f"domain endpoint {v!r} is not a multiple of 2**-30")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @classmethod
    def outward(cls, lo, hi, names=("e2", "e3", "e4")) -> "Domain":
        """Domain with endpoints rounded outward to the 2**-30 grid."""
        down = [math.floor(Fraction(v) / Fraction(GRID_QUANTUM)) * GRID_QUANTUM for v in lo]
        return cls(tuple(down), tuple(_round_up(v) for v in hi), tuple(names))

    def describe(self) -> dict:
        return {n: [a, b] for n, a, b in zip(self.names, self.lo, self.hi)}


DEFAULT_DOMAIN = Domain((1.0, 1.0, 1.0), (E2_HI, E4_HI, E4_HI))
SLICE_DOMAIN = Domain((1.0, 1.0), (E2_HI, E4_HI), ("e2", "e3"))


@dataclass(frozen=True)
class Box:
    """Dyadic sub-box of a :class:`Domain`: axis ``k`` spans
    ``[index_k, index_k + 1] * width_k / 2**level_k`` above ``lo_k``."""

    levels: tuple[int, ...]
    indices: tuple[int, ...]

    def bounds(self, domain: Domain) -> list[tuple[float, float]]:
        out = []
        for lo, hi, lev, idx in zip(domain.lo, domain.hi, self.levels, self.indices):
            w = hi - lo
            out.append((lo + (w * idx) / 2**lev, lo + (w * (idx + 1)) / 2**lev))
        return out

    def to_json(self, domain: Domain) -> dict:
        return {n: list(b) for n, b in zip(domain.names, self.bounds(domain))}

    def halves(self, axis: int) -> tuple["Box", "Box"]:
        levels = list(self.levels)
        levels[axis] += 1
        lo = list(self.indices)
        hi = list(self.indices)
        lo[axis] *= 2
        hi[axis] = 2 * hi[axis] + 1
        return Box(tuple(levels), tuple(lo)), Box(tuple(levels), tuple(hi))


def _box_arrays(domain: Domain, levels: np.ndarray, indices: np.ndarray):
    """Exact endpoint arrays ``(lo, hi)`` of shape ``(n, dim)``."""
    lo0 = np.asarray(domain.lo)
    width = np.asarray(domain.hi) - lo0
    scale = np.ldexp(1.0, -levels)
    lo = lo0 + (width * indices) * scale
    hi = lo0 + (width * (indices + 1)) * scale
    return lo, hi


def _infeasible(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Boxes lying wholly outside ``e2 <= e3 (<= e4)``."""
    bad = lo[:, 0] > hi[:, 1]
    if lo.shape[1] > 2:
        bad |= lo[:, 1] > hi[:, 2]
    return bad


# ---------------------------------------------------------------------------
# lower bounds

def _finite_lo(F: Jet) -> np.ndarray:
    lo, _ = jet_range(F)
    lo = np.asarray(lo, dtype=float)
    return np.where(np.isnan(lo), -np.inf, lo)


def _spectrum_jets(lo: np.ndarray, hi: np.ndarray):
    X2 = jet_from_intervals(1, lo[:, 0], hi[:, 0])
    X3 = jet_from_intervals(2, lo[:, 1], hi[:, 1])
    X4 = jet_from_intervals(3, lo[:, 2], hi[:, 2])
    return X2, X3, X4


def _e_max_jet(X4: Jet, lo4: np.ndarray, hi4: np.ndarray) -> Jet:
    """``min(e4, E_CAP)``: e4 itself below the cap, the constant above it,
    and a jet minimum only where the box straddles the cap."""
    with np.errstate(all="ignore"):
        mixed = jet_min(X4, Jet(E_CAP))
    below = hi4 <= E_CAP
    above = lo4 > E_CAP
    zero = np.zeros_like(lo4)
    fields = []
    for x, m, c in zip(X4.fields, mixed.fields, (E_CAP, 0.0, 0.0, 0.0, 0.0)):
        fields.append(np.where(below, x, np.where(above, zero + c, m)))
    return Jet(*fields, check=False)


def batch_lower_bounds(triples, lo: np.ndarray, hi: np.ndarray, threshold: float = THRESHOLD,
                       use_f2: bool = True) -> np.ndarray:
    """Rigorous lower bounds of ``max(f1, f2)`` on each box (rows of ``lo``/``hi``).

    ``f2`` is tried only on boxes where ``f1`` alone does not beat
    ``threshold`` and the gate holds over the whole box.  A box whose jets
    break down (a possible division by zero, say) gets ``-inf``.
    """
    triples = getattr(triples, "triples", triples)
    with np.errstate(all="ignore"):
        X2, X3, X4 = _spectrum_jets(lo, hi)
        em = _e_max_jet(X4, lo[:, 2], hi[:, 2])
        F1 = f1(triples, SpectrumPoint(X2, X3, X4), em=em)
        bound = _finite_lo(F1)
        if not use_f2:
            return bound
        need = (bound <= threshold) & gate_holds(SpectrumPoint(X2, X3, X4))
        if np.any(need):
            idx = np.flatnonzero(need)
            sub = SpectrumPoint(X2.take(idx), X3.take(idx), X4.take(idx))
            F2 = F1.take(idx) + f2_bonus(sub)
            bound[idx] = np.maximum(bound[idx], _finite_lo(F2))
    return bound


def slice_lower_bounds(cases: Sequence, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Worst case over ``cases`` of the rigorous lower bound of ``f1`` with
    ``e4`` pinned to an interval enclosing 1.5152 (2-D boxes)."""
    n = lo.shape[0]
    e4_lo = np.full(n, np.nextafter(E_CAP, 0.0) if Fraction(E_CAP) > Fraction("1.5152") else E_CAP)
    e4_hi = np.full(n, E_CAP if Fraction(E_CAP) >= Fraction("1.5152") else np.nextafter(E_CAP, 2.0))
    lo3 = np.column_stack([lo, e4_lo])
    hi3 = np.column_stack([hi, e4_hi])
    out = np.full(n, np.inf)
    for case in cases:
        out = np.minimum(out, batch_lower_bounds(case, lo3, hi3, use_f2=False))
    return out


def lower_bound_on_box(case, box, domain: Domain = DEFAULT_DOMAIN, threshold: float = THRESHOLD,
                       use_f2: bool = True) -> float:
    """Rigorous lower bound of ``max(f1, f2)`` over one box.

    ``box`` is a :class:`Box` of ``domain`` or a sequence of three
    ``(lo, hi)`` pairs with exactly representable endpoints.
    """
    if isinstance(box, Box):
        bounds = box.bounds(domain)
    else:
        bounds = [(float(a), float(b)) for a, b in box]
    if len(bounds) != 3 or any(not a <= b for a, b in bounds):
        raise ValueError(f"need three non-empty intervals, got {bounds}")
    lo = np.array([[b[0] for b in bounds]])
    hi = np.array([[b[1] for b in bounds]])
    return float(batch_lower_bounds(case, lo, hi, threshold, use_f2)[0])


# ---------------------------------------------------------------------------
# reports

@dataclass
class Strategy:
    """How to search: ``mode`` is ``adaptive`` (bisect failing boxes up to
    ``depth`` levels per axis) or ``grid`` (uniform ``2**depth`` per axis)."""

    mode: str = "adaptive"
    depth: int = 9
    threshold: float = THRESHOLD
    workers: int = 1
    budget: int | None = None
    chunk_size: int = 4096
    max_failures: int = 16
    use_f2: bool = True

    def __post_init__(self):
        if self.mode not in ("adaptive", "grid"):
            raise ValueError(f"mode must be 'adaptive' or 'grid', not {self.mode!r}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must lie in [1, {MAX_DEPTH}], got {self.depth}")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")

    def to_json(self, reproducible: bool = False) -> dict:
        return {
            "mode": self.mode,
            "depth": self.depth,
            "workers": None if reproducible else self.workers,
            "budget": self.budget,
            "chunk_size": self.chunk_size,
            "use_f2": self.use_f2,
        }


@dataclass
class CaseReport:
    case_id: int | str
    triples: list
    boxes_processed: int = 0
    leaves: int = 0
    discarded: int = 0
    max_depth_reached: int = 0
    min_certified_lower_bound: float = math.inf
    status: str = "certified"
    wall_time_ms: float = 0.0
    failures: list = field(default_factory=list)
    failure_count: int = 0
    validated: bool = False
    notes: list = field(default_factory=list)
    argmin: list | None = None
    leaf_boxes: list | None = None

    @property
    def passed(self) -> bool:
        return self.status in ("certified", "validated")

    def to_json(self, reproducible: bool = False) -> dict:
        lb = self.min_certified_lower_bound
        out = {
            "case_id": self.case_id,
            "triples": self.triples,
            "boxes_processed": self.boxes_processed,
            "leaves": self.leaves,
            "discarded": self.discarded,
            "max_depth_reached": self.max_depth_reached,
            "min_lower_bound": lb if math.isfinite(lb) else None,
            "status": self.status,
            "wall_time_ms": None if reproducible else round(self.wall_time_ms, 3),
            "failure_count": self.failure_count,
            "failures": self.failures,
        }
        if self.validated:
            out["argmin"] = self.argmin
            out["notes"] = self.notes
        return out


@dataclass
class CertificateBundle:
    threshold: float
    strategy: Strategy
    domain: dict
    reports: list[CaseReport]
    eps_model: dict = field(default_factory=lambda: jets.MACHINE.describe())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_json(self, reproducible: bool = False) -> dict:
        return {
            "threshold": self.threshold,
            "eps_model": self.eps_model,
            "domain": self.domain,
            "strategy": self.strategy.to_json(reproducible),
            "all_passed": self.passed,
            "cases": [r.to_json(reproducible) for r in self.reports],
        }


# ---------------------------------------------------------------------------
# search

class _Pool:
    """Evaluates chunks of boxes inline or across worker processes.

    Work is split into chunks and the results are concatenated in chunk
    order, so the output never depends on the number of workers.
    """

    def __init__(self, workers: int):
        self.workers = workers
        self._executor = ProcessPoolExecutor(workers) if workers > 1 else None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self._executor is not None:
            self._executor.shutdown()

    def map(self, fn: Callable, payload, lo: np.ndarray, hi: np.ndarray, chunk: int) -> np.ndarray:
        n = lo.shape[0]
        if n == 0:
            return np.empty(0)
        if self._executor is None:
            parts = [fn(payload, lo[s:s + chunk], hi[s:s + chunk]) for s in range(0, n, chunk)]
        else:
            size = max(1, min(chunk, -(-n // self.workers)))
            starts = range(0, n, size)
            parts = list(self._executor.map(
                fn, [payload] * len(starts), [lo[s:s + size] for s in starts], [hi[s:s + size] for s in starts]))
        return np.concatenate(parts)


def _eval_case(payload, lo, hi):
    triples, threshold, use_f2 = payload
    return batch_lower_bounds(triples, lo, hi, threshold, use_f2)


def _eval_slice(payload, lo, hi):
    return slice_lower_bounds(payload, lo, hi)


def _grid_waves(dim: int, depth: int):
    """Uniform grid, one slab of fixed first index at a time."""
    side = np.arange(2**depth, dtype=np.int64)
    rest = np.meshgrid(*[side] * (dim - 1), indexing="ij")
    rest = np.column_stack([g.ravel() for g in rest])
    for i in side:
        indices = np.column_stack([np.full(rest.shape[0], i, dtype=np.int64), rest])
        yield np.full_like(indices, depth), indices


def _search(label, triples, domain: Domain, strategy: Strategy, pool: _Pool, fn, payload,
            progress=None, keep_leaves=False) -> CaseReport:
    start = time.perf_counter()
    dim = domain.dim
    report = CaseReport(case_id=label, triples=triples)
    if keep_leaves:
        report.leaf_boxes = []
    threshold = strategy.threshold
    widths = np.asarray(domain.hi) - np.asarray(domain.lo)
    adaptive = strategy.mode == "adaptive"
    processed = 0

    def wave(levels, indices):
        """Evaluate one batch; return the boxes to refine (adaptive mode)."""
        nonlocal processed
        lo, hi = _box_arrays(domain, levels, indices)
        bad = _infeasible(lo, hi)
        if keep_leaves:
            for lv, ix in zip(levels[bad], indices[bad]):
                report.leaf_boxes.append(("discarded", Box(tuple(int(v) for v in lv), tuple(int(v) for v in ix))))
        report.discarded += int(bad.sum())
        keep = ~bad
        levels, indices, lo, hi = levels[keep], indices[keep], lo[keep], hi[keep]
        if strategy.budget is not None and processed + indices.shape[0] > strategy.budget:
            take = strategy.budget - processed
            levels, indices, lo, hi = levels[:take], indices[:take], lo[:take], hi[:take]
            report.status = "budget-exhausted"
        n = indices.shape[0]
        if n == 0:
            return None
        bound = pool.map(fn, payload, lo, hi, strategy.chunk_size)
        processed += n
        report.boxes_processed = processed
        report.max_depth_reached = max(report.max_depth_reached, int(levels.max()))
        ok = bound > threshold
        if adaptive:
            # longest axis among those below the cap; ties go to the lowest axis
            side = widths * np.ldexp(1.0, -levels)
            side = np.where(levels < strategy.depth, side, -1.0)
            axis = np.argmax(side, axis=1)
            split = ~ok & (side.max(axis=1) > 0)
            if report.status == "budget-exhausted":
                split[:] = False
        else:
            split = np.zeros(n, dtype=bool)
        leaf = ~split
        report.leaves += int(leaf.sum())
        if np.any(leaf):
            report.min_certified_lower_bound = min(report.min_certified_lower_bound, float(bound[leaf].min()))
        failed = leaf & ~ok
        if np.any(failed):
            if report.status == "certified":
                report.status = "failed"
            report.failure_count += int(failed.sum())
            for k in np.flatnonzero(failed):
                if len(report.failures) >= strategy.max_failures:
                    break
                box = Box(tuple(int(v) for v in levels[k]), tuple(int(v) for v in indices[k]))
                entry = box.to_json(domain)
                entry["lower_bound"] = float(bound[k]) if math.isfinite(bound[k]) else None
                report.failures.append(entry)
        if keep_leaves:
            for k in np.flatnonzero(leaf):
                box = Box(tuple(int(v) for v in levels[k]), tuple(int(v) for v in indices[k]))
                report.leaf_boxes.append(("certified" if ok[k] else "failed", box))
        if progress is not None:
            progress(f"case {label}: {processed} boxes, {int(split.sum())} to refine, "
                     f"{report.failure_count} failed")
        if not np.any(split):
            return None
        idx = np.flatnonzero(split)
        lv = levels[idx]
        ix = indices[idx]
        ax = axis[idx]
        rows = np.arange(idx.size)
        lv[rows, ax] += 1
        ix[rows, ax] *= 2
        ix_hi = ix.copy()
        ix_hi[rows, ax] += 1
        # children follow their parents in order, so the sequence of boxes is
        # a pure function of the bounds computed so far
        return np.stack([lv, lv], axis=1).reshape(-1, dim), np.stack([ix, ix_hi], axis=1).reshape(-1, dim)

    if adaptive:
        pending = (np.zeros((1, dim), dtype=np.int64), np.zeros((1, dim), dtype=np.int64))
        while pending is not None and report.status != "budget-exhausted":
            pending = wave(*pending)
    else:
        for levels, indices in _grid_waves(dim, strategy.depth):
            wave(levels, indices)
            if report.status == "budget-exhausted":
                break
    report.wall_time_ms = (time.perf_counter() - start) * 1e3
    return report


def _triples_json(case) -> list:
    return [list(t) for t in getattr(case, "triples", case)]


def certify_case(case, domain: Domain = DEFAULT_DOMAIN, strategy: Strategy | None = None, *,
                 pool: _Pool | None = None, progress=None, keep_leaves: bool = False) -> CaseReport:
    """Certify ``max(f1, f2) > strategy.threshold`` over ``domain`` for one case."""
    strategy = strategy or Strategy()
    if domain.dim != 3:
        raise ValueError("case certification needs a 3-D domain")
    case_id = getattr(case, "id", 0)
    triples = case.triples if hasattr(case, "triples") else tuple(case)
    payload = (tuple(tuple(t) for t in triples), strategy.threshold, strategy.use_f2)
    if pool is None:
        with _Pool(strategy.workers) as own:
            return _search(case_id, _triples_json(triples), domain, strategy, own, _eval_case, payload,
                           progress, keep_leaves)
    return _search(case_id, _triples_json(triples), domain, strategy, pool, _eval_case, payload,
                   progress, keep_leaves)


def certify_cases(cases: Sequence | None = None, domain: Domain = DEFAULT_DOMAIN,
                  strategy: Strategy | None = None, progress=None) -> CertificateBundle:
    """Certify several cases (all 18 by default) with one worker pool."""
    strategy = strategy or Strategy()
    cases = the_18_cases() if cases is None else [get_case(c) if isinstance(c, int) else c for c in cases]
    reports = []
    with _Pool(strategy.workers) as pool:
        for case in cases:
            reports.append(certify_case(case, domain, strategy, pool=pool, progress=progress))
    return CertificateBundle(strategy.threshold, strategy, domain.describe(), reports)


def certify_slice(domain2d: Domain = SLICE_DOMAIN, strategy: Strategy | None = None, cases=None,
                  progress=None) -> CaseReport:
    """Certify ``f1 > threshold`` on the face ``e4 = 1.5152`` for all cases at
    once, using the worst case on each box."""
    strategy = strategy or Strategy()
    if domain2d.dim != 2:
        raise ValueError("the slice domain is 2-D (e2, e3)")
    cases = the_18_cases() if cases is None else cases
    payload = tuple(tuple(tuple(t) for t in c.triples) for c in cases)
    with _Pool(strategy.workers) as pool:
        report = _search("slice", [c.id for c in cases], domain2d, strategy, pool, _eval_slice, payload, progress)
    return report


def default_workers() -> int:
    env = os.environ.get("MOMCERT_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            print(f"ignoring MOMCERT_WORKERS={env!r}: not an integer", file=sys.stderr)
        else:
            if n >= 1:
                return n
    return 1
