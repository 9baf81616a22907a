"""Bit-exact simulation of the reciprocal deterministic relay channel.

Each node's transmit vector has one bit per relay level (index 0 = level 1,
the most significant). A node with gain n reaches, and hears, levels 1..n
only. The relay receives the XOR of everything on a level, permutes levels
according to the schedule and broadcasts.

A session runs the schedule of the *equivalent* rate tuple for several rounds.
Bits of a detoured stream u->v travel u->w in round t and are forwarded
verbatim by w in round t+1, so they arrive with latency 2.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .detour import DetourPlan, rerouted_total
from .model import NODES, STREAMS, ChannelConfig, GainVector, Stream, stream_name
from .scheduler import Schedule, Slot

LevelVector = np.ndarray  # uint8, length q


class ScheduleViolation(AssertionError):
    """A slot sits on a level some sender or receiver cannot reach."""


class DeliveryFailure(AssertionError):
    def __init__(self, failure: dict):
        super().__init__(f"bit mismatch: {failure}")
        self.failure = failure


def mask(vec: LevelVector, n: int) -> LevelVector:
    out = vec.copy()
    out[n:] = 0
    return out


def uplink_step(transmits: dict[int, LevelVector], g: GainVector) -> LevelVector:
    q = g.q
    rx = np.zeros(q, dtype=np.uint8)
    for node, vec in transmits.items():
        rx ^= mask(vec, g[node])
    return rx


def downlink_step(relay_tx: LevelVector, g: GainVector) -> dict[int, LevelVector]:
    return {node: mask(relay_tx, g[node]) for node in NODES}


def relay_forward(rx: LevelVector, perm: dict[int, int]) -> LevelVector:
    tx = np.zeros_like(rx)
    for up, down in perm.items():
        tx[down - 1] = rx[up - 1]
    return tx


def check_reachability(schedule: Schedule, g: GainVector) -> None:
    for node, levels in schedule.uplink.items():
        for level in levels:
            if level > g[node]:
                raise ScheduleViolation(f"node {node} scheduled on uplink level {level} > n{node}={g[node]}")
    for level, slot in schedule.downlink_slots().items():
        for node in slot.receivers():
            if level > g[node]:
                raise ScheduleViolation(f"node {node} must hear downlink level {level} > n{node}={g[node]}")
    ups, downs = set(schedule.relay_perm), set(schedule.relay_perm.values())
    if len(downs) != len(ups) or downs != set(schedule.downlink_slots()):
        raise ScheduleViolation("relay permutation is not a bijection onto occupied downlink levels")


def decode(node: int, reception: LevelVector, schedule: Schedule,
           own_sent: dict[tuple[Stream, int], int]) -> dict[tuple[Stream, int], int]:
    """Recover every equivalent-stream bit addressed to ``node``.

    XOR levels are undone with the node's own bit on the reverse stream.
    """
    out = {}
    for level, slot in schedule.downlink_slots().items():
        bit = int(reception[level - 1])
        for s in slot.streams():
            if s[1] != node:
                continue
            if slot.kind == "xor":
                bit ^= own_sent[((node, s[0]), slot.index)]
            out[(s, slot.index)] = bit
    return out


# Equivalent-stream bit contents:
#   ("direct", (a, b), i)  original a->b bit i
#   ("hop1", (a, x), i)    original a->x bit i, on its way to relay node b
#   ("hop2", (x, b), i)    original x->b bit i, forwarded by a from last round
Piece = tuple[str, Stream, int]


def stream_layout(plan: DetourPlan) -> dict[Stream, list[Piece]]:
    counts = plan.reroute_counts()
    layout: dict[Stream, list[Piece]] = {s: [] for s in STREAMS}
    for s in STREAMS:
        direct = plan.original[s] - rerouted_total(counts, s)
        layout[s].extend(("direct", s, i) for i in range(direct))
    for rp in plan.reroutes:
        (u, v), w = rp.stream, rp.via
        layout[(u, w)].extend(("hop1", (u, v), i) for i in rp.bit_indices)
    for rp in plan.reroutes:
        (u, v), w = rp.stream, rp.via
        layout[(w, v)].extend(("hop2", (u, v), i) for i in rp.bit_indices)
    for s in STREAMS:
        if len(layout[s]) != plan.equivalent[s]:
            raise ValueError(f"layout of {stream_name(s)} has {len(layout[s])} bits, "
                             f"equivalent rate is {plan.equivalent[s]}")
    return layout


@dataclass
class RoundTrace:
    round: int
    uplink: dict[int, list[int]]
    relay_rx: list[int]
    relay_tx: list[int]
    downlink: dict[int, list[int]]
    decoded: dict[int, dict[str, int]]

    def as_dict(self) -> dict:
        return {
            "round": self.round,
            "uplink": {str(k): v for k, v in self.uplink.items()},
            "relay_rx": self.relay_rx,
            "relay_tx": self.relay_tx,
            "downlink": {str(k): v for k, v in self.downlink.items()},
            "decoded": {str(k): v for k, v in self.decoded.items()},
        }


@dataclass
class DeliveryReport:
    rounds: int
    seed: int
    delivered: dict[Stream, int]
    latency: dict[Stream, Counter]
    expected: dict[Stream, int]
    failures: list[dict] = field(default_factory=list)
    traces: list[RoundTrace] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return not self.failures and self.delivered == self.expected

    def as_dict(self, with_trace: bool = False) -> dict:
        d = {
            "success": self.success,
            "rounds": self.rounds,
            "seed": self.seed,
            "streams": {
                stream_name(s).lower(): {
                    "delivered": self.delivered[s],
                    "expected": self.expected[s],
                    "latency": {str(k): v for k, v in sorted(self.latency[s].items())},
                }
                for s in STREAMS
            },
            "failures": self.failures,
        }
        if with_trace:
            d["trace"] = [t.as_dict() for t in self.traces]
        return d


def _bits(vec: LevelVector) -> list[int]:
    return [int(b) for b in vec]


def run_session(plan: DetourPlan, schedule: Schedule, g: GainVector, rounds: int, seed: int,
                trace: bool = False, strict: bool = False) -> DeliveryReport:
    """Run ``rounds`` rounds and check every original bit of rounds 1..rounds-1.

    Round 0 only primes the forwarders so detoured traffic is in steady state
    from round 1; second hops of round ``rounds`` are still in flight at the end
    and are not counted.
    """
    if rounds < 2:
        raise ValueError("need at least 2 rounds")
    if schedule.rates != plan.equivalent:
        raise ValueError("schedule was not built from the plan's equivalent rates")
    check_reachability(schedule, g)
    q = ChannelConfig(g).q
    layout = stream_layout(plan)
    rng = np.random.default_rng(seed)
    payload = [{s: rng.integers(0, 2, plan.original[s]).astype(np.uint8) for s in STREAMS}
               for _ in range(rounds + 1)]

    # node -> (orig stream, index) -> bit held for forwarding next round
    held: dict[int, dict[tuple[Stream, int], int]] = defaultdict(dict)
    for rp in plan.reroutes:
        for i in rp.bit_indices:
            held[rp.via][(rp.stream, i)] = int(payload[0][rp.stream][i])

    delivered = {s: 0 for s in STREAMS}
    latency = {s: Counter() for s in STREAMS}
    expected = {s: plan.original[s] * (rounds - 1) for s in STREAMS}
    failures: list[dict] = []
    traces: list[RoundTrace] = []

    def record(s: Stream, origin: int, i: int, got: int, now: int) -> None:
        want = int(payload[origin][s][i])
        if got != want:
            fail = {"stream": stream_name(s), "round": origin, "index": i, "expected": want, "got": got}
            if strict:
                raise DeliveryFailure(fail)
            failures.append(fail)
        elif 1 <= origin <= rounds - 1:
            delivered[s] += 1
            latency[s][now - origin + 1] += 1

    up_slots = schedule.uplink_slots()
    for t in range(1, rounds + 1):
        sent: dict[tuple[Stream, int], int] = {}
        for s, pieces in layout.items():
            for m, (kind, orig, i) in enumerate(pieces):
                if kind == "hop2":
                    sent[(s, m)] = held[s[0]].pop((orig, i))
                else:
                    sent[(s, m)] = int(payload[t][orig][i])

        transmits = {n: np.zeros(q, dtype=np.uint8) for n in NODES}
        for node, levels in schedule.uplink.items():
            for level, slot in levels.items():
                mine = [s for s in slot.streams() if s[0] == node][0]
                transmits[node][level - 1] = sent[(mine, slot.index)]
        rx = uplink_step(transmits, g)
        tx = relay_forward(rx, schedule.relay_perm)
        # relay transparency: occupied levels carry the same multiset of values
        if sorted(rx[l - 1] for l in up_slots) != sorted(tx[l - 1] for l in schedule.relay_perm.values()):
            raise ScheduleViolation(f"relay altered payload in round {t}")
        heard = downlink_step(tx, g)

        decoded_all = {}
        for node in NODES:
            decoded = decode(node, heard[node], schedule, sent)
            decoded_all[node] = {f"{stream_name(s)}[{m}]": b for (s, m), b in sorted(decoded.items())}
            for (s, m), bit in decoded.items():
                kind, orig, i = layout[s][m]
                if kind == "direct":
                    record(orig, t, i, bit, t)
                elif kind == "hop1":
                    held[node][(orig, i)] = bit
                else:
                    record(orig, t - 1, i, bit, t)
        if trace:
            traces.append(RoundTrace(t, {n: _bits(v) for n, v in transmits.items()}, _bits(rx), _bits(tx),
                                     {n: _bits(v) for n, v in heard.items()}, decoded_all))

    return DeliveryReport(rounds, seed, delivered, latency, expected, failures, traces)
