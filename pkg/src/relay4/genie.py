"""One-sided genie cut bounds, generated from every cut and genie order.

For a side S and a genie order (s_1, ..., s_m) the genie hands every node's
messages to the nodes after it in the order, so only intra-side rates from a
later node to an earlier one remain unknown. Downlink: S receives; the bound
counts all rates from outside into S. Uplink: S transmits; the bound counts
all rates from S to outside. The right-hand side is the strongest gain in S.
When S is all four nodes (the cut around the relay) only the six intra terms
remain and both phases give the same family of bounds.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .model import NODES, STREAM_INDEX, STREAMS, GainVector, RateTuple, Stream, stream_name
from .region import membership_batch, theorem1_conditions


class Phase(str, enum.Enum):
    UPLINK = "UPLINK"
    DOWNLINK = "DOWNLINK"


@dataclass(frozen=True)
class CutSpec:
    phase: Phase
    side: frozenset[int]
    genie_order: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.side:
            raise ValueError("cut side must be non-empty")
        if sorted(self.genie_order) != sorted(self.side):
            raise ValueError("genie order must be a permutation of the side")

    @property
    def is_relay_cut(self) -> bool:
        return len(self.side) == 4


@dataclass(frozen=True)
class GenieBound:
    cut: CutSpec
    streams: tuple[Stream, ...]
    bound_node: int
    bound: int

    def lhs(self, r: RateTuple) -> int:
        return sum(r[s] for s in self.streams)

    def holds(self, r: RateTuple) -> bool:
        return self.lhs(r) <= self.bound

    def key(self) -> tuple:
        return (frozenset(self.streams), self.bound_node)

    def text(self) -> str:
        return " + ".join(stream_name(s) for s in self.streams) + f" <= n{self.bound_node}"

    def as_record(self) -> dict:
        return {
            "phase": self.cut.phase.value,
            "side": sorted(self.cut.side),
            "genie_order": list(self.cut.genie_order),
            "inequality": self.text(),
            "rhs": self.bound,
        }


def _strongest(side: Iterable[int], g: GainVector) -> int:
    # highest gain, ties to the smaller label
    return min(side, key=lambda n: (-g[n], n))


def intra_terms(order: tuple[int, ...]) -> list[Stream]:
    """Rates from genie-later nodes to genie-earlier nodes."""
    return [(order[b], order[a]) for a in range(len(order)) for b in range(a + 1, len(order))]


def generate_bound(cut: CutSpec, g: GainVector) -> GenieBound:
    side = cut.side
    outside = [n for n in NODES if n not in side]
    if cut.phase is Phase.DOWNLINK:
        cross = [(o, s) for s in sorted(side) for o in outside]
    else:
        cross = [(s, o) for s in sorted(side) for o in outside]
    streams = tuple(cross + intra_terms(cut.genie_order))
    node = _strongest(side, g)
    return GenieBound(cut, streams, node, g[node])


def all_cuts() -> list[CutSpec]:
    cuts = []
    for phase in (Phase.DOWNLINK, Phase.UPLINK):
        for size in (4, 3, 2, 1):
            for side in itertools.combinations(NODES, size):
                for order in itertools.permutations(side):
                    cuts.append(CutSpec(phase, frozenset(side), order))
    return cuts


def all_bounds(g: GainVector) -> list[GenieBound]:
    """Every (phase, side, order) bound, duplicates dropped (first occurrence kept)."""
    seen = set()
    out = []
    for cut in all_cuts():
        b = generate_bound(cut, g)
        if b.key() not in seen:
            seen.add(b.key())
            out.append(b)
    return out


def bound_matrix(bounds: list[GenieBound]) -> tuple[np.ndarray, np.ndarray]:
    A = np.zeros((len(bounds), 12), dtype=np.int64)
    rhs = np.array([b.bound for b in bounds], dtype=np.int64)
    for row, b in enumerate(bounds):
        for s in b.streams:
            A[row, STREAM_INDEX[s]] += 1
    return A, rhs


def genie_membership_batch(R: np.ndarray, g: GainVector,
                           bounds: list[GenieBound] | None = None) -> np.ndarray:
    A, rhs = bound_matrix(all_bounds(g) if bounds is None else bounds)
    return np.all(R @ A.T <= rhs, axis=1)


@dataclass
class EquivalenceReport:
    gains: GainVector
    examined: int
    members: int
    disagreements: list[dict]

    @property
    def equivalent(self) -> bool:
        return not self.disagreements

    def as_dict(self) -> dict:
        return {
            "gains": list(self.gains),
            "examined": self.examined,
            "members": self.members,
            "disagreements": len(self.disagreements),
            "witnesses": self.disagreements[:20],
            "equivalent": self.equivalent,
        }


def equivalence_check(g: GainVector, tuples: np.ndarray | Iterable[RateTuple],
                      chunk: int = 200_000) -> EquivalenceReport:
    """Compare genie-bound membership with the 13 printed inequalities tuple by tuple."""
    if not isinstance(tuples, np.ndarray):
        tuples = np.array([list(t) for t in tuples], dtype=np.int64).reshape(-1, 12)
    bounds = all_bounds(g)
    conds = theorem1_conditions()
    disagreements: list[dict] = []
    members = 0
    for start in range(0, len(tuples), chunk):
        R = tuples[start:start + chunk]
        via_genie = genie_membership_batch(R, g, bounds)
        via_region = membership_batch(R, g, conds)
        members += int(via_region.sum())
        for row in np.nonzero(via_genie != via_region)[0]:
            disagreements.append({
                "rates": [int(v) for v in R[row]],
                "genie": bool(via_genie[row]),
                "region": bool(via_region[row]),
            })
    return EquivalenceReport(g, int(len(tuples)), members, disagreements)


def bounding_box(g: GainVector, slack: int = 0) -> list[int]:
    """Per-stream upper limits; any member has R_uv <= min(n_u, n_v)."""
    return [min(g[u], g[v]) + slack for u, v in STREAMS]


def box_tuples(g: GainVector, slack: int = 0) -> np.ndarray:
    """All integer tuples in the bounding box, as an (N, 12) array."""
    return np.concatenate(list(iter_box(g, slack)))


def iter_box(g: GainVector, slack: int = 0, outer: int = 6) -> Iterator[np.ndarray]:
    """Yield the bounding box in chunks: one chunk per assignment of the first ``outer`` streams."""
    limits = bounding_box(g, slack)
    inner = np.meshgrid(*[np.arange(m + 1) for m in limits[outer:]], indexing="ij")
    inner = np.stack([x.ravel() for x in inner], axis=1).astype(np.int64)
    for head in itertools.product(*[range(m + 1) for m in limits[:outer]]):
        block = np.empty((inner.shape[0], 12), dtype=np.int64)
        block[:, :outer] = head
        block[:, outer:] = inner
        yield block
