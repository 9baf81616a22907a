"""Symbolic inequality catalog: the capacity region and the direct-scheduling conditions.

A :class:`Condition` is a sum of atoms bounded by one node's gain. Atoms are a
single rate, the max of a rate and its reverse, or the max of two rate sums.
The 13 region inequalities come in three blocks (downlink, uplink, and the
n1-bounded "common" block); the 16 extra conditions are what the direct
scheduler additionally needs. Each extra condition is built around a directed
cycle, which the detour planner uses to reroute bits.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .model import STREAM_INDEX, GainVector, RateTuple, Stream, reverse, stream_name


class Family(str, enum.Enum):
    DL = "DL"
    UL = "UL"
    COMMON = "COMMON"
    EXTRA_4 = "EXTRA_4"
    EXTRA_5 = "EXTRA_5"
    EXTRA_6 = "EXTRA_6"
    EXTRA_7 = "EXTRA_7"

    @property
    def is_extra(self) -> bool:
        return self.name.startswith("EXTRA")


@dataclass(frozen=True)
class Rate:
    stream: Stream

    def value(self, r: RateTuple) -> int:
        return r[self.stream]

    def batch(self, R: np.ndarray) -> np.ndarray:
        return R[:, STREAM_INDEX[self.stream]]

    def branches(self) -> list[tuple[Stream, ...]]:
        return [(self.stream,)]

    def key(self):
        return ("rate", self.stream)

    def __str__(self) -> str:
        return stream_name(self.stream)


@dataclass(frozen=True)
class MaxPair:
    a: Stream
    b: Stream

    def __post_init__(self) -> None:
        if self.b != reverse(self.a):
            raise ValueError("MaxPair arguments must be a stream and its reverse")

    def value(self, r: RateTuple) -> int:
        return max(r[self.a], r[self.b])

    def batch(self, R: np.ndarray) -> np.ndarray:
        return np.maximum(R[:, STREAM_INDEX[self.a]], R[:, STREAM_INDEX[self.b]])

    def branches(self) -> list[tuple[Stream, ...]]:
        return [(self.a,), (self.b,)]

    def key(self):
        return ("pair", tuple(sorted((self.a, self.b))))

    def __str__(self) -> str:
        return f"max({stream_name(self.a)}, {stream_name(self.b)})"


@dataclass(frozen=True)
class MaxSum:
    left: tuple[Stream, ...]
    right: tuple[Stream, ...]

    def __post_init__(self) -> None:
        if not self.left or not self.right:
            raise ValueError("MaxSum branches must be non-empty")

    def value(self, r: RateTuple) -> int:
        return max(sum(r[s] for s in self.left), sum(r[s] for s in self.right))

    def batch(self, R: np.ndarray) -> np.ndarray:
        lhs = R[:, [STREAM_INDEX[s] for s in self.left]].sum(axis=1)
        rhs = R[:, [STREAM_INDEX[s] for s in self.right]].sum(axis=1)
        return np.maximum(lhs, rhs)

    def branches(self) -> list[tuple[Stream, ...]]:
        return [self.left, self.right]

    def key(self):
        return ("sum", tuple(sorted((tuple(sorted(self.left)), tuple(sorted(self.right))))))

    def __str__(self) -> str:
        left = "+".join(stream_name(s) for s in self.left)
        right = "+".join(stream_name(s) for s in self.right)
        return f"max({left}, {right})"


Atom = Union[Rate, MaxPair, MaxSum]


@dataclass(frozen=True)
class Condition:
    """``sum(atoms) <= n_bound``.

    ``cycle`` holds the directed cycle for extra conditions: a 3-cycle
    (i, j, k) with leftover node ``leftover`` for EXTRA_6, a Hamiltonian
    4-cycle for EXTRA_7. EXTRA_4/5 carry two candidate 3-cycles in their
    MaxSum atom; the active one depends on the rates.
    """

    id: str
    atoms: tuple[Atom, ...]
    bound: int
    family: Family
    cycle: tuple[int, ...] = ()
    leftover: int | None = None
    index: int = field(default=-1, compare=False)

    def lhs(self, r: RateTuple) -> int:
        return sum(a.value(r) for a in self.atoms)

    def lhs_batch(self, R: np.ndarray) -> np.ndarray:
        out = np.zeros(R.shape[0], dtype=np.int64)
        for a in self.atoms:
            out += a.batch(R)
        return out

    def linear_forms(self) -> list[tuple[Stream, ...]]:
        """Every branch choice as a plain list of streams (the condition holds iff all do)."""
        forms = []
        for choice in itertools.product(*(a.branches() for a in self.atoms)):
            forms.append(tuple(s for part in choice for s in part))
        return forms

    def streams(self) -> set[Stream]:
        return {s for form in self.linear_forms() for s in form}

    def key(self):
        return (self.bound, tuple(sorted(a.key() for a in self.atoms)))

    def text(self) -> str:
        return " + ".join(str(a) for a in self.atoms) + f" <= n{self.bound}"

    def as_record(self) -> dict:
        rec = {"id": self.id, "family": self.family.value, "inequality": self.text()}
        if self.cycle:
            rec["cycle"] = list(self.cycle)
        if self.leftover is not None:
            rec["leftover"] = self.leftover
        return rec


@dataclass(frozen=True)
class Gap:
    condition: Condition
    lhs: int
    rhs: int

    @property
    def gap(self) -> int:
        return self.lhs - self.rhs

    @property
    def condition_id(self) -> str:
        return self.condition.id

    @property
    def violated(self) -> bool:
        return self.gap > 0

    def as_dict(self) -> dict:
        return {"condition": self.condition.id, "family": self.condition.family.value,
                "inequality": self.condition.text(), "lhs": self.lhs, "rhs": self.rhs,
                "gap": self.gap}


@dataclass(frozen=True)
class MembershipReport:
    in_region: bool
    sos_feasible: bool
    violated: tuple[Gap, ...]
    extra_violated: tuple[Gap, ...]
    mgc: Gap | None

    def as_dict(self) -> dict:
        return {
            "in_region": self.in_region,
            "sos_feasible": self.sos_feasible,
            "violated": [g.as_dict() for g in self.violated],
            "extra_violated": [g.as_dict() for g in self.extra_violated],
            "mgc": self.mgc.as_dict() if self.mgc else None,
        }


def _R(*pairs: str) -> tuple[Stream, ...]:
    return tuple((int(p[0]), int(p[1])) for p in pairs)


def _rates(*pairs: str) -> list[Atom]:
    return [Rate(s) for s in _R(*pairs)]


def _mp(p: str) -> MaxPair:
    s = (int(p[0]), int(p[1]))
    return MaxPair(s, reverse(s))


def _ms(left: Sequence[str], right: Sequence[str]) -> MaxSum:
    return MaxSum(_R(*left), _R(*right))


@lru_cache(maxsize=None)
def theorem1_conditions() -> tuple[Condition, ...]:
    """The 13 region inequalities as printed, in catalog order."""
    C = Condition
    conds = [
        C("DL1", tuple(_rates("14", "24", "34")), 4, Family.DL),
        C("DL2", tuple(_rates("13", "23", "14", "24") + [_mp("34")]), 3, Family.DL),
        C("DL3", tuple(_rates("12", "13", "14", "32", "42") + [_mp("34")]), 2, Family.DL),
        C("DL4", tuple(_rates("12", "13", "14", "23", "43") + [_mp("24")]), 2, Family.DL),
        C("DL5", tuple(_rates("12", "13", "14", "24", "34") + [_mp("23")]), 2, Family.DL),
        C("UL1", tuple(_rates("41", "42", "43")), 4, Family.UL),
        C("UL2", tuple(_rates("31", "32", "41", "42") + [_mp("34")]), 3, Family.UL),
        C("UL3", tuple(_rates("21", "31", "41", "23", "24") + [_mp("34")]), 2, Family.UL),
        C("UL4", tuple(_rates("21", "31", "41", "32", "34") + [_mp("24")]), 2, Family.UL),
        C("UL5", tuple(_rates("21", "31", "41", "42", "43") + [_mp("23")]), 2, Family.UL),
        C("C1", (_ms(("12", "13", "42", "43"), ("21", "31", "24", "34")), _mp("23"), _mp("14")),
          1, Family.COMMON),
        C("C2", (_ms(("12", "14", "32", "34"), ("21", "41", "23", "43")), _mp("13"), _mp("24")),
          1, Family.COMMON),
        C("C3", (_ms(("13", "14", "23", "24"), ("31", "41", "32", "42")), _mp("12"), _mp("34")),
          1, Family.COMMON),
    ]
    return tuple(_indexed(conds, 0))


def _cycle_rotation(cycle: Sequence[int]) -> tuple[int, ...]:
    k = cycle.index(min(cycle))
    return tuple(cycle[k:]) + tuple(cycle[:k])


def extra6(cycle: Sequence[int], leftover: int) -> Condition:
    i, j, k = cycle
    l = leftover
    atoms = (Rate((i, j)), Rate((j, k)), Rate((k, i)),
             MaxSum(((l, i), (l, j), (l, k)), ((i, l), (j, l), (k, l))))
    name = "X6[" + ">".join(map(str, cycle)) + f"|{l}]"
    return Condition(name, atoms, 1, Family.EXTRA_6, tuple(cycle), l)


def extra7(cycle: Sequence[int]) -> Condition:
    i, j, k, l = cycle
    atoms = (Rate((i, j)), Rate((j, k)), Rate((k, l)), Rate((l, i)),
             MaxPair((j, l), (l, j)), MaxPair((i, k), (k, i)))
    name = "X7[" + ">".join(map(str, cycle)) + "]"
    return Condition(name, atoms, 1, Family.EXTRA_7, tuple(cycle))


@lru_cache(maxsize=None)
def lemma1_conditions() -> tuple[Condition, ...]:
    """The 16 direct-scheduling conditions: 1 + 1 + 8 three-cycle + 6 four-cycle forms."""
    conds = [
        Condition("X4", (_ms(("23", "34", "42"), ("32", "24", "43")),) + tuple(_rates("12", "13", "14")),
                  2, Family.EXTRA_4),
        Condition("X5", (_ms(("23", "34", "42"), ("32", "24", "43")),) + tuple(_rates("21", "31", "41")),
                  2, Family.EXTRA_5),
    ]
    seen = {c.key() for c in conds}
    six, seven = [], []
    for perm in itertools.permutations((1, 2, 3, 4)):
        c6 = extra6(_cycle_rotation(perm[:3]), perm[3])
        if c6.key() not in seen:
            seen.add(c6.key())
            six.append(c6)
        c7 = extra7(_cycle_rotation(perm))
        if c7.key() not in seen:
            seen.add(c7.key())
            seven.append(c7)
    six.sort(key=lambda c: (c.leftover, c.cycle))
    seven.sort(key=lambda c: c.cycle)
    return tuple(_indexed(conds + six + seven, len(theorem1_conditions())))


def _indexed(conds: Iterable[Condition], start: int) -> list[Condition]:
    out = []
    for n, c in enumerate(conds, start):
        object.__setattr__(c, "index", n)
        out.append(c)
    return out


def all_conditions() -> tuple[Condition, ...]:
    return theorem1_conditions() + lemma1_conditions()


def condition_by_id(cid: str) -> Condition:
    for c in all_conditions():
        if c.id == cid:
            return c
    raise KeyError(cid)


def evaluate(c: Condition, r: RateTuple, g: GainVector) -> Gap:
    return Gap(c, c.lhs(r), g[c.bound])


def in_region(r: RateTuple, g: GainVector) -> bool:
    return all(c.lhs(r) <= g[c.bound] for c in theorem1_conditions())


def check(r: RateTuple, g: GainVector) -> MembershipReport:
    violated = tuple(gp for gp in (evaluate(c, r, g) for c in theorem1_conditions()) if gp.violated)
    extra = tuple(gp for gp in (evaluate(c, r, g) for c in lemma1_conditions()) if gp.violated)
    mgc = None
    if extra:
        # max gap; ties go to the earliest condition in the catalog
        mgc = min(extra, key=lambda gp: (-gp.gap, gp.condition.index))
    return MembershipReport(
        in_region=not violated,
        sos_feasible=not violated and not extra,
        violated=violated,
        extra_violated=extra,
        mgc=mgc,
    )


def membership_batch(R: np.ndarray, g: GainVector,
                     conditions: Sequence[Condition] | None = None) -> np.ndarray:
    """Vectorised membership of each row of ``R`` (shape (N, 12)) under ``conditions``."""
    conds = theorem1_conditions() if conditions is None else conditions
    ok = np.ones(R.shape[0], dtype=bool)
    for c in conds:
        ok &= c.lhs_batch(R) <= g[c.bound]
    return ok


def catalog() -> list[dict]:
    return [c.as_record() for c in all_conditions()]
