"""Exhaustive and sampled sweeps over the capacity region.

Every region tuple goes through plan -> schedule -> simulate; a sweep passes
only if every tuple's bits arrive. The same machinery produces the samples
used for the bound-equivalence check.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .channel import ScheduleViolation, run_session
from .detour import NoPlanFound, Scheme, plan
from .genie import bounding_box, equivalence_check, genie_membership_batch
from .model import STREAM_INDEX, STREAMS, GainVector, RateTuple
from .region import Condition, membership_batch, theorem1_conditions
from .scheduler import InfeasibleSchedule, build_schedule

REFERENCE_GAINS = (7, 6, 5, 4)
WORKED_EXAMPLES = (
    RateTuple((2, 0, 0, 0, 0, 2, 1, 1, 1, 1, 0, 0)),
    RateTuple((0, 0, 2, 1, 0, 1, 1, 2, 0, 0, 0, 2)),
)
ENUMERATION_CAP = 50_000_000

# n4-bounded streams first, then the n3 pair, then the rest
PRUNING_ORDER = [STREAM_INDEX[s] for s in
                 [(1, 4), (2, 4), (3, 4), (4, 1), (4, 2), (4, 3),
                  (1, 3), (2, 3), (3, 1), (3, 2), (1, 2), (2, 1)]]


class TooLarge(Exception):
    pass


def linear_system(g: GainVector, conditions: Sequence[Condition] | None = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Expand max atoms: ``A @ r <= rhs`` row-wise iff every condition holds."""
    conds = theorem1_conditions() if conditions is None else conditions
    rows, rhs = [], []
    for c in conds:
        for form in c.linear_forms():
            row = np.zeros(12, dtype=np.int64)
            for s in form:
                row[STREAM_INDEX[s]] += 1
            rows.append(row)
            rhs.append(g[c.bound])
    return np.array(rows), np.array(rhs, dtype=np.int64)


def enumerate_region(g: GainVector, cap: int = ENUMERATION_CAP) -> Iterator[RateTuple]:
    """Depth-first enumeration with partial-sum pruning.

    All coefficients are non-negative, so a partial assignment whose sums
    already exceed a bound cannot be completed.
    """
    limits = bounding_box(g)
    estimate = math.prod(m + 1 for m in limits)
    if estimate > cap:
        raise TooLarge(f"bounding box holds {estimate} tuples (cap {cap})")
    A, rhs = linear_system(g)
    cols = [A[:, k] for k in PRUNING_ORDER]
    values = [0] * 12

    def dfs(depth: int, partial: np.ndarray) -> Iterator[RateTuple]:
        if depth == 12:
            yield RateTuple(tuple(values))
            return
        k = PRUNING_ORDER[depth]
        col = cols[depth]
        for v in range(limits[k] + 1):
            nxt = partial + v * col
            if np.any(nxt > rhs):
                break
            values[k] = v
            yield from dfs(depth + 1, nxt)
        values[k] = 0

    yield from dfs(0, np.zeros(len(rhs), dtype=np.int64))


def brute_force_region(g: GainVector) -> list[RateTuple]:
    """Unpruned scan of the bounding box (tiny gains only)."""
    limits = bounding_box(g)
    return [RateTuple(t) for t in itertools.product(*[range(m + 1) for m in limits])
            if bool(membership_batch(np.array([t]), g)[0])]


class RegionSampler:
    """Uniform rejection sampler for region tuples.

    Proposals are drawn uniformly from a product of two 6-stream blocks, each
    pre-filtered by the region inequalities restricted to that block. That
    product contains the whole region, so accepted draws stay uniform; it is
    just far tighter than the raw bounding box. Falls back to the box when a
    block is too large to tabulate.
    """

    BLOCKS = (list(range(0, 6)), list(range(6, 12)))
    BLOCK_CAP = 2_000_000

    def __init__(self, g: GainVector, seed: int):
        self.g = g
        self.rng = np.random.default_rng(seed)
        self.limits = np.array(bounding_box(g))
        self.tables = self._tables()

    def _tables(self) -> list[np.ndarray] | None:
        A, rhs = linear_system(self.g)
        tables = []
        for block in self.BLOCKS:
            if math.prod(int(self.limits[k]) + 1 for k in block) > self.BLOCK_CAP:
                return None
            grids = np.meshgrid(*[np.arange(self.limits[k] + 1) for k in block], indexing="ij")
            X = np.stack([x.ravel() for x in grids], axis=1).astype(np.int64)
            tables.append(X[np.all(X @ A[:, block].T <= rhs, axis=1)])
        return tables

    def propose(self, n: int) -> np.ndarray:
        if self.tables is None:
            return self.rng.integers(0, self.limits + 1, size=(n, 12))
        R = np.empty((n, 12), dtype=np.int64)
        for block, table in zip(self.BLOCKS, self.tables):
            R[:, block] = table[self.rng.integers(0, len(table), n)]
        return R

    def sample(self, count: int, batch: int = 50_000) -> tuple[list[RateTuple], np.ndarray]:
        """``count`` region members plus every proposal drawn along the way."""
        members: list[RateTuple] = []
        proposals = []
        while len(members) < count:
            R = self.propose(batch)
            proposals.append(R)
            for row in R[membership_batch(R, self.g)]:
                members.append(RateTuple(tuple(int(x) for x in row)))
                if len(members) == count:
                    break
        drawn = np.concatenate(proposals) if proposals else np.zeros((0, 12), dtype=np.int64)
        return members, drawn


@dataclass
class Outcome:
    rates: RateTuple
    scheme: Scheme | None
    ok: bool
    error: dict | None = None
    decomposition_note: str | None = None
    iterations: int = 0


def run_pipeline(r: RateTuple, g: GainVector, rounds: int = 4, seed: int = 0) -> Outcome:
    """plan -> schedule -> simulate for one region tuple."""
    try:
        p = plan(r, g)
    except NoPlanFound as exc:
        return Outcome(r, None, False, {"kind": "NoPlanFound", "witness": exc.witness})
    note = p.notes[0] if p.notes else None
    try:
        sched = build_schedule(p.equivalent, g)
        rep = run_session(p, sched, g, rounds, seed)
    except (InfeasibleSchedule, ScheduleViolation) as exc:
        return Outcome(r, p.scheme, False, {"kind": type(exc).__name__, "rates": r.as_dict(),
                                              "message": str(exc)}, note, len(p.steps))
    if not rep.success:
        return Outcome(r, p.scheme, False, {"kind": "DeliveryFailure", "rates": r.as_dict(),
                                              "failures": rep.failures[:5]}, note, len(p.steps))
    return Outcome(r, p.scheme, True, None, note, len(p.steps))


@dataclass
class SweepReport:
    gains: GainVector
    tuples_examined: int = 0
    in_region: int = 0
    sos_direct: int = 0
    detoured: dict[str, int] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    counterexamples: list[dict] = field(default_factory=list)
    decomposition_mismatches: list[dict] = field(default_factory=list)
    max_iterations: int = 0
    bound_equivalence: dict | None = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        equiv_ok = self.bound_equivalence is None or self.bound_equivalence["equivalent"]
        return not self.failures and not self.counterexamples and equiv_ok

    def add(self, out: Outcome) -> None:
        self.in_region += 1
        if out.scheme is Scheme.IDENTITY:
            self.sos_direct += 1
        elif out.scheme is not None:
            self.detoured[out.scheme.value] = self.detoured.get(out.scheme.value, 0) + 1
        self.max_iterations = max(self.max_iterations, out.iterations)
        if out.decomposition_note:
            self.decomposition_mismatches.append({"rates": out.rates.as_dict(), "note": out.decomposition_note})
        if not out.ok:
            if out.error["kind"] == "NoPlanFound":
                self.counterexamples.append(out.error["witness"])
            else:
                self.failures.append(out.error)

    def merge(self, other: "SweepReport") -> "SweepReport":
        self.tuples_examined += other.tuples_examined
        self.in_region += other.in_region
        self.sos_direct += other.sos_direct
        for k, v in other.detoured.items():
            self.detoured[k] = self.detoured.get(k, 0) + v
        self.failures += other.failures
        self.counterexamples += other.counterexamples
        self.decomposition_mismatches += other.decomposition_mismatches
        self.max_iterations = max(self.max_iterations, other.max_iterations)
        return self

    def as_dict(self) -> dict:
        return {
            "gains": list(self.gains),
            "tuples_examined": self.tuples_examined,
            "in_region": self.in_region,
            "sos_direct": self.sos_direct,
            "detoured": dict(sorted(self.detoured.items())),
            "max_detour_iterations": self.max_iterations,
            "simulation_failures": self.failures,
            "no_plan_found": self.counterexamples,
            "decomposition_mismatches": len(self.decomposition_mismatches),
            "bound_equivalence": self.bound_equivalence,
            "wall_time_s": round(self.wall_time, 3),
            "ok": self.ok,
        }


def _chunk_worker(args) -> SweepReport:
    gains, rows, rounds, seed = args
    g = GainVector(gains)
    rep = SweepReport(g)
    for k, row in enumerate(rows):
        rep.add(run_pipeline(RateTuple(row), g, rounds, seed + k))
    return rep


def _run_all(g: GainVector, tuples: list[RateTuple], rounds: int, seed: int, threads: int) -> SweepReport:
    rows = [r.values for r in tuples]
    if threads <= 1 or len(rows) < 2 * threads:
        return _chunk_worker((g.values, rows, rounds, seed))
    size = math.ceil(len(rows) / threads)
    jobs = [(g.values, rows[i:i + size], rounds, seed + i) for i in range(0, len(rows), size)]
    total = SweepReport(g)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(_chunk_worker, jobs):
            total.merge(part)
    return total


def achievability_sweep(g: GainVector, rounds: int = 4, seed: int = 0, threads: int = 1,
                        strict: bool = False) -> SweepReport:
    """Every region tuple at ``g`` through the full pipeline."""
    t0 = time.perf_counter()
    tuples = list(enumerate_region(g))
    rep = _run_all(g, tuples, rounds, seed, threads)
    rep.tuples_examined = len(tuples)
    rep.wall_time = time.perf_counter() - t0
    if strict and not rep.ok:
        raise AssertionError(f"sweep at {list(g)} failed: {(rep.failures + rep.counterexamples)[0]}")
    return rep


def random_sweep(g: GainVector, count: int, seed: int, rounds: int = 4, threads: int = 1,
                 include_worked_examples: bool = True, check_bounds: bool = True) -> SweepReport:
    """``count`` region tuples sampled uniformly (the two worked examples forced in at their gains)."""
    t0 = time.perf_counter()
    if count <= 0:
        return SweepReport(g)
    forced = list(WORKED_EXAMPLES) if include_worked_examples and tuple(g) == REFERENCE_GAINS else []
    forced = forced[:count]
    sampled, drawn = RegionSampler(g, seed).sample(count - len(forced))
    tuples = forced + sampled
    rep = _run_all(g, tuples, rounds, seed, threads)
    rep.tuples_examined = len(drawn) + len(forced)
    if check_bounds:
        rep.bound_equivalence = equivalence_check(g, drawn).as_dict()
    rep.wall_time = time.perf_counter() - t0
    return rep


def boundary_witnesses(g: GainVector, seed: int = 0, samples: int = 2000) -> dict[str, RateTuple]:
    """One just-outside tuple per region inequality: lhs = rhs + 1 on it.

    Preference goes to tuples that break that inequality alone, found by adding
    one bit to sampled members; otherwise rhs + 1 bits are spread over the
    inequality's first branch with every other rate zero.
    """
    conds = theorem1_conditions()
    found: dict[str, RateTuple] = {}
    members, _ = RegionSampler(g, seed).sample(samples)
    for r in members:
        for s in STREAMS:
            bumped = r.with_deltas([(s, 1)])
            broken = [c for c in conds if c.lhs(bumped) > g[c.bound]]
            if len(broken) == 1 and broken[0].lhs(bumped) == g[broken[0].bound] + 1:
                found.setdefault(broken[0].id, bumped)
        if len(found) == len(conds):
            break
    for c in conds:
        if c.id in found:
            continue
        form = c.linear_forms()[0]
        vals = dict.fromkeys(STREAMS, 0)
        for k in range(g[c.bound] + 1):
            vals[form[k % len(form)]] += 1
        found[c.id] = RateTuple.from_mapping(vals)
    return {c.id: found[c.id] for c in conds}


def genie_agrees(r: RateTuple, g: GainVector) -> bool:
    return bool(genie_membership_batch(np.array([r.values]), g)[0])
