"""Simple Ordering Scheme: level-by-level schedule for one round.

Downlink: the relay's broadcast is cut into four segments stacked from level 1
upward, one per destination, weakest destination first (4, 3, 2, 1). Segment
d holds the XOR-paired bits of every pair {d, k} not already placed, followed
by the leftover one-directional bits destined to d.

Uplink: every XOR pair is sent by both endpoints on one shared level, so the
relay hears x_uv ^ x_vu; one-directional bits are sent alone. The relay only
permutes received levels onto their downlink positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import GainVector, RateTuple, Stream, reverse, stream_name

DESTINATION_ORDER = (4, 3, 2, 1)


class InfeasibleSchedule(Exception):
    """The tuple does not fit the direct scheme; plan a detour first."""


@dataclass(frozen=True)
class Slot:
    """Payload of one level.

    ``kind`` is ``"xor"`` (bit ``index`` of ``stream`` XOR the same index of the
    reverse stream) or ``"plain"`` (bit ``index`` of ``stream`` alone).
    """

    kind: str
    stream: Stream
    index: int

    def streams(self) -> tuple[Stream, ...]:
        if self.kind == "xor":
            return (self.stream, reverse(self.stream))
        return (self.stream,)

    def senders(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.streams())

    def receivers(self) -> tuple[int, ...]:
        return tuple(s[1] for s in self.streams())

    def describe(self) -> str:
        if self.kind == "xor":
            return f"{stream_name(self.stream)}[{self.index}] ^ {stream_name(reverse(self.stream))}[{self.index}]"
        return f"{stream_name(self.stream)}[{self.index}]"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "stream": list(self.stream), "index": self.index}


@dataclass(frozen=True)
class LevelSlot:
    level: int
    slot: Slot


@dataclass(frozen=True)
class Segment:
    destination: int
    slots: tuple[LevelSlot, ...]

    @property
    def size(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class Schedule:
    gains: GainVector
    rates: RateTuple
    downlink: tuple[Segment, ...]
    uplink: dict[int, dict[int, Slot]]   # node -> uplink level -> slot it transmits on
    relay_perm: dict[int, int]           # uplink level -> downlink level

    def downlink_slots(self) -> dict[int, Slot]:
        return {ls.level: ls.slot for seg in self.downlink for ls in seg.slots}

    def uplink_slots(self) -> dict[int, Slot]:
        out: dict[int, Slot] = {}
        for levels in self.uplink.values():
            out.update(levels)
        return out

    def segment_sizes(self) -> dict[int, int]:
        return {seg.destination: seg.size for seg in self.downlink}

    def rows(self) -> list[dict]:
        """Flat (phase, level, content) table."""
        rows = []
        for up_level, slot in sorted(self.uplink_slots().items()):
            rows.append({"phase": "uplink", "level": up_level, "senders": list(slot.senders()),
                         "content": slot.describe()})
        for seg in self.downlink:
            for ls in seg.slots:
                rows.append({"phase": "downlink", "level": ls.level, "segment": seg.destination,
                             "receivers": list(ls.slot.receivers()), "content": ls.slot.describe()})
        return rows

    def as_dict(self) -> dict:
        return {
            "gains": list(self.gains),
            "rates": self.rates.as_dict(),
            "segment_sizes": {str(d): s for d, s in self.segment_sizes().items()},
            "relay_perm": {str(k): v for k, v in sorted(self.relay_perm.items())},
            "rows": self.rows(),
        }


def _partners(d: int, g: GainVector) -> list[int]:
    # descending gain, ties by label
    return sorted((k for k in (1, 2, 3, 4) if k != d), key=lambda k: (-g[k], k))


def build_downlink(r: RateTuple, g: GainVector) -> list[Segment]:
    if not g.is_canonical:
        raise ValueError("gains must be canonical (non-increasing)")
    segments = []
    placed_pairs: set[frozenset[int]] = set()
    level = 0
    for d in DESTINATION_ORDER:
        slots: list[LevelSlot] = []
        for k in _partners(d, g):
            pair = frozenset((d, k))
            r_kd, r_dk = r[(k, d)], r[(d, k)]
            zeta = min(r_kd, r_dk)
            if pair not in placed_pairs:
                placed_pairs.add(pair)
                for m in range(zeta):
                    level += 1
                    slots.append(LevelSlot(level, Slot("xor", (k, d), m)))
            for m in range(zeta, r_kd):
                level += 1
                slots.append(LevelSlot(level, Slot("plain", (k, d), m)))
        if level > g[d]:
            raise InfeasibleSchedule(
                f"segments 4..{d} need {level} downlink levels but node {d} hears only {g[d]}")
        segments.append(Segment(d, tuple(slots)))
    return segments


def _uplink_cap(slot: Slot, g: GainVector) -> int:
    return min(g[n] for n in slot.senders())


def build_uplink(segments: list[Segment], r: RateTuple,
                 g: GainVector) -> tuple[dict[int, dict[int, Slot]], dict[int, int]]:
    """Assign uplink levels lowest-cap first, then derive the relay permutation.

    Slots are ordered by the weakest sender's gain (stable in downlink order) and
    packed from level 1 upward; this succeeds whenever any assignment exists.
    """
    ordered = [ls for seg in segments for ls in seg.slots]
    ordered.sort(key=lambda ls: _uplink_cap(ls.slot, g))
    uplink: dict[int, dict[int, Slot]] = {n: {} for n in (1, 2, 3, 4)}
    relay_perm: dict[int, int] = {}
    for up_level, ls in enumerate(ordered, 1):
        cap = _uplink_cap(ls.slot, g)
        if up_level > cap:
            raise InfeasibleSchedule(
                f"uplink slot {ls.slot.describe()} needs level {up_level} above sender gain {cap}")
        for n in ls.slot.senders():
            uplink[n][up_level] = ls.slot
        relay_perm[up_level] = ls.level
    return uplink, relay_perm


def build_schedule(r: RateTuple, g: GainVector) -> Schedule:
    segments = build_downlink(r, g)
    uplink, perm = build_uplink(segments, r, g)
    return Schedule(g, r, tuple(segments), uplink, perm)


def sos_feasible(r: RateTuple, g: GainVector) -> bool:
    try:
        build_schedule(r, g)
    except InfeasibleSchedule:
        return False
    return True
