"""Core value types for the four-node reciprocal relay network.

Nodes are labelled 1..4 and talk only through the relay. A rate tuple holds
the 12 private-message demands R_ij (bits per round), listed in the order

    R12 R13 R14 R21 R23 R24 R31 R32 R34 R41 R42 R43

Gains are level counts shared by uplink and downlink. After
:func:`canonicalize` they satisfy n1 >= n2 >= n3 >= n4. Level 1 is the most
significant level; node i injects onto and hears relay levels 1..n_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

NODES = (1, 2, 3, 4)
STREAMS: tuple[tuple[int, int], ...] = tuple((i, j) for i in NODES for j in NODES if i != j)
STREAM_INDEX = {s: k for k, s in enumerate(STREAMS)}
RATE_KEYS = tuple(f"r{i}{j}" for i, j in STREAMS)

Stream = tuple[int, int]


def stream_name(s: Stream) -> str:
    return f"R{s[0]}{s[1]}"


def reverse(s: Stream) -> Stream:
    return (s[1], s[0])


@dataclass(frozen=True)
class RateTuple:
    """The 12 non-negative integer demands, indexed by ``(src, dst)``."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = tuple(int(v) for v in self.values)
        if len(vals) != 12:
            raise ValueError(f"a rate tuple has 12 entries, got {len(vals)}")
        for key, v in zip(RATE_KEYS, vals):
            if v < 0:
                raise ValueError(f"rate {key} must be non-negative, got {v}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls) -> "RateTuple":
        return cls((0,) * 12)

    @classmethod
    def from_mapping(cls, rates: Mapping) -> "RateTuple":
        """Build from ``{"r12": 2, ...}`` or ``{(1, 2): 2, ...}``; missing keys are zero."""
        vals = [0] * 12
        for key, v in rates.items():
            if isinstance(key, tuple):
                idx = STREAM_INDEX.get(key)
            else:
                k = str(key).lower()
                if not k.startswith("r"):
                    k = "r" + k
                idx = RATE_KEYS.index(k) if k in RATE_KEYS else None
            if idx is None:
                raise ValueError(f"unknown rate key {key!r}")
            vals[idx] = v
        return cls(tuple(vals))

    def __getitem__(self, s: Stream) -> int:
        return self.values[STREAM_INDEX[s]]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def items(self) -> Iterator[tuple[Stream, int]]:
        return zip(STREAMS, self.values)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(RATE_KEYS, self.values))

    def total(self) -> int:
        return sum(self.values)

    def with_deltas(self, deltas: Iterable[tuple[Stream, int]]) -> "RateTuple":
        vals = list(self.values)
        for s, d in deltas:
            vals[STREAM_INDEX[s]] += d
        return RateTuple(tuple(vals))

    def __str__(self) -> str:
        return "{" + ",".join(str(v) for v in self.values) + "}"


@dataclass(frozen=True)
class GainVector:
    """Reciprocal level counts ``n_1..n_4``, one per node."""

    values: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        vals = tuple(int(v) for v in self.values)
        if len(vals) != 4:
            raise ValueError(f"gains need 4 entries, got {len(vals)}")
        for i, v in enumerate(vals, 1):
            if v < 0:
                raise ValueError(f"gain n{i} must be non-negative, got {v}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, node: int) -> int:
        return self.values[node - 1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    @property
    def is_canonical(self) -> bool:
        v = self.values
        return v[0] >= v[1] >= v[2] >= v[3]

    @property
    def q(self) -> int:
        return max(self.values)


@dataclass(frozen=True)
class ChannelConfig:
    """Gains plus the relay's level count ``q`` (the strongest gain).

    Gaussian intuition for a gain: n_i ~ ceil(0.5 log2 SNR_i); only the
    integer level counts are modelled here.
    """

    gains: GainVector

    @property
    def q(self) -> int:
        return self.gains.q


@dataclass(frozen=True)
class Relabeling:
    """Bijection between original node labels and canonical labels."""

    to_canonical: tuple[int, int, int, int]  # to_canonical[orig - 1] = canonical label

    @property
    def to_original(self) -> tuple[int, int, int, int]:
        inv = [0] * 4
        for orig, canon in enumerate(self.to_canonical, 1):
            inv[canon - 1] = orig
        return tuple(inv)

    @property
    def is_identity(self) -> bool:
        return self.to_canonical == (1, 2, 3, 4)

    def node_to_canonical(self, node: int) -> int:
        return self.to_canonical[node - 1]

    def node_to_original(self, node: int) -> int:
        return self.to_original[node - 1]

    def stream_to_canonical(self, s: Stream) -> Stream:
        return (self.node_to_canonical(s[0]), self.node_to_canonical(s[1]))

    def stream_to_original(self, s: Stream) -> Stream:
        return (self.node_to_original(s[0]), self.node_to_original(s[1]))

    def rates_to_canonical(self, rates: RateTuple) -> RateTuple:
        return RateTuple.from_mapping({self.stream_to_canonical(s): v for s, v in rates.items()})

    def rates_to_original(self, rates: RateTuple) -> RateTuple:
        return RateTuple.from_mapping({self.stream_to_original(s): v for s, v in rates.items()})

    def gains_to_original(self, gains: GainVector) -> GainVector:
        return GainVector(tuple(gains[self.node_to_canonical(o)] for o in NODES))

    def as_dict(self) -> dict[str, int]:
        return {str(o): c for o, c in zip(NODES, self.to_canonical)}


def canonicalize(gains: Sequence[int] | GainVector,
                 rates: RateTuple) -> tuple[GainVector, RateTuple, Relabeling]:
    """Relabel nodes so gains are non-increasing.

    Ties keep the original index order (stable sort), so an already sorted
    instance maps to itself.
    """
    raw = tuple(gains)
    if len(raw) != 4:
        raise ValueError(f"gains need 4 entries, got {len(raw)}")
    if any(int(g) < 0 for g in raw):
        raise ValueError("gains must be non-negative")
    order = sorted(NODES, key=lambda node: -raw[node - 1])  # stable
    to_canonical = [0] * 4
    for canon, orig in enumerate(order, 1):
        to_canonical[orig - 1] = canon
    relabel = Relabeling(tuple(to_canonical))
    canon_gains = GainVector(tuple(raw[o - 1] for o in order))
    return canon_gains, relabel.rates_to_canonical(rates), relabel
