"""Detour planning: turn a region tuple the direct scheme cannot carry into an
equivalent one it can.

A detour moves ``count`` bits of stream u->v onto the two-hop path u->w->v:
R_uv drops by ``count`` while R_uw and R_wv each grow by ``count``. Scheme 1
reroutes one edge of the 3-cycle named by the maximum-gap condition through
the cycle's third node. Scheme 2 handles a 4-cycle condition: it reroutes the
edge shared by the two embedded 3-cycles, splitting the gap between the two
other nodes (``beta`` via one, ``gamma`` via the other).

Only bits of the original demand are ever rerouted, so every delivered bit
takes at most one intermediate hop.
"""

from __future__ import annotations

import enum
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

from .model import NODES, STREAM_INDEX, STREAMS, GainVector, RateTuple, Stream, stream_name
from .region import Condition, Family, Gap, MembershipReport, check

log = logging.getLogger(__name__)

MAX_ITERATIONS = 16
SEARCH_STATE_BUDGET = 250_000


class Scheme(str, enum.Enum):
    IDENTITY = "IDENTITY"
    DS1 = "DS1"
    DS2 = "DS2"
    MIXED = "MIXED"
    SEARCH = "SEARCH"


class DecompositionFailure(Exception):
    """No non-negative split beta + gamma = lambda fits the 4-cycle detour."""


class NoPlanFound(Exception):
    """No detour sequence reaches a directly schedulable tuple.

    ``witness`` carries the tuple, gains and search trace verbatim.
    """

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


class NotInRegion(ValueError):
    pass


Reroute = tuple[int, int, int]  # (u, v, w): bits of u->v travel via w


@dataclass(frozen=True)
class RateDelta:
    stream: Stream
    delta: int

    def as_dict(self) -> dict:
        return {"stream": stream_name(self.stream), "delta": self.delta}


@dataclass(frozen=True)
class ReroutePlan:
    stream: Stream
    via: int
    count: int
    bit_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.via in self.stream:
            raise ValueError("detour node must differ from both endpoints")
        if self.count < 1:
            raise ValueError("reroute count must be positive")

    def as_dict(self) -> dict:
        return {"stream": list(self.stream), "via": self.via, "count": self.count,
                "bit_indices": list(self.bit_indices)}


@dataclass(frozen=True)
class Step:
    """One detour application: the condition it targets and the bits it moves."""

    scheme: Scheme
    condition_id: str
    lam: int
    beta: int
    gamma: int
    moves: tuple[tuple[Reroute, int], ...]
    note: str = ""

    def as_dict(self) -> dict:
        d = {"scheme": self.scheme.value, "condition": self.condition_id, "lambda": self.lam,
             "beta": self.beta, "gamma": self.gamma,
             "moves": [{"stream": [u, v], "via": w, "count": c} for (u, v, w), c in self.moves]}
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class DetourPlan:
    original: RateTuple
    equivalent: RateTuple
    deltas: tuple[RateDelta, ...]
    reroutes: tuple[ReroutePlan, ...]
    lam: int
    beta: int
    gamma: int
    scheme: Scheme
    steps: tuple[Step, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def delta_map(self) -> dict[Stream, int]:
        return {d.stream: d.delta for d in self.deltas}

    def reroute_counts(self) -> dict[Reroute, int]:
        return {(rp.stream[0], rp.stream[1], rp.via): rp.count for rp in self.reroutes}

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "original": self.original.as_dict(),
            "equivalent": self.equivalent.as_dict(),
            "lambda": self.lam,
            "beta": self.beta,
            "gamma": self.gamma,
            "deltas": [d.as_dict() for d in self.deltas],
            "reroutes": [r.as_dict() for r in self.reroutes],
            "steps": [s.as_dict() for s in self.steps],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# bookkeeping


def equivalent_rates(r: RateTuple, counts: dict[Reroute, int]) -> RateTuple:
    vals = list(r.values)
    for (u, v, w), c in counts.items():
        vals[STREAM_INDEX[(u, v)]] -= c
        vals[STREAM_INDEX[(u, w)]] += c
        vals[STREAM_INDEX[(w, v)]] += c
    return RateTuple(tuple(vals))


def rerouted_total(counts: dict[Reroute, int], s: Stream) -> int:
    return sum(c for (u, v, _), c in counts.items() if (u, v) == s)


def _valid_counts(r: RateTuple, counts: dict[Reroute, int]) -> bool:
    for s in STREAMS:
        if rerouted_total(counts, s) > r[s]:
            return False
    return all(c >= 0 for c in counts.values())


def _merge(counts: dict[Reroute, int], moves: Iterable[tuple[Reroute, int]]) -> dict[Reroute, int]:
    out = dict(counts)
    for key, c in moves:
        out[key] = out.get(key, 0) + c
    return {k: c for k, c in out.items() if c}


def reroute_plans(r: RateTuple, counts: dict[Reroute, int]) -> tuple[ReroutePlan, ...]:
    """Detoured bits take the highest indices of each original stream, lowest via node first."""
    plans = []
    for s in STREAMS:
        vias = sorted((w, c) for (u, v, w), c in counts.items() if (u, v) == s and c > 0)
        nxt = r[s] - sum(c for _, c in vias)
        for w, c in vias:
            plans.append(ReroutePlan(s, w, c, tuple(range(nxt, nxt + c))))
            nxt += c
    return tuple(plans)


def _deltas(r: RateTuple, eq: RateTuple) -> tuple[RateDelta, ...]:
    return tuple(RateDelta(s, eq[s] - r[s]) for s in STREAMS if eq[s] != r[s])


def _finish(r: RateTuple, counts: dict[Reroute, int], steps: list[Step],
            scheme: Scheme | None = None, notes: Iterable[str] = ()) -> DetourPlan:
    eq = equivalent_rates(r, counts)
    if scheme is None:
        kinds = {s.scheme for s in steps}
        scheme = Scheme.IDENTITY if not kinds else kinds.pop() if len(kinds) == 1 else Scheme.MIXED
    first = steps[0] if steps else None
    return DetourPlan(
        original=r,
        equivalent=eq,
        deltas=_deltas(r, eq),
        reroutes=reroute_plans(r, counts),
        lam=first.lam if first else 0,
        beta=first.beta if first else 0,
        gamma=first.gamma if first else 0,
        scheme=scheme,
        steps=tuple(steps),
        notes=tuple(notes),
    )


def identity_plan(r: RateTuple) -> DetourPlan:
    return _finish(r, {}, [])


# ---------------------------------------------------------------------------
# scheme 1


def _slack(r: RateTuple, s: Stream) -> int:
    return r[s] - r[(s[1], s[0])]


def active_cycles(r: RateTuple, cond: Condition) -> list[tuple[int, int, int]]:
    """Directed 3-cycles named by a 3-cycle condition at this tuple."""
    if cond.family is Family.EXTRA_6:
        return [tuple(cond.cycle)]
    if cond.family in (Family.EXTRA_4, Family.EXTRA_5):
        fwd = r[(2, 3)] + r[(3, 4)] + r[(4, 2)]
        bwd = r[(3, 2)] + r[(2, 4)] + r[(4, 3)]
        cycles = []
        if fwd >= bwd:
            cycles.append((2, 3, 4))
        if bwd >= fwd:
            cycles.append((2, 4, 3))
        return cycles
    raise ValueError(f"{cond.id} is not a 3-cycle condition")


def apply_ds1(r: RateTuple, mgc: Gap, g: GainVector) -> list[Step]:
    """Candidate single-edge detours for a 3-cycle condition, best first.

    Each cycle edge u->v is rerouted through the remaining node w. Edges with
    more forward-over-reverse slack come first; among equal slack the detour
    through the strongest node wins (its load rises in both phases).
    """
    lam = mgc.gap
    if lam < 1:
        return []
    out = []
    for cyc in active_cycles(r, mgc.condition):
        for t in range(3):
            u, v, w = cyc[t], cyc[(t + 1) % 3], cyc[(t + 2) % 3]
            out.append(Step(Scheme.DS1, mgc.condition_id, lam, 0, 0, (((u, v, w), lam),)))
    seen, unique = set(), []
    for st in out:
        if st.moves not in seen:
            seen.add(st.moves)
            unique.append(st)

    def rank(st: Step):
        (u, v, w), _ = st.moves[0]
        return (-_slack(r, (u, v)), -g[w], w, STREAM_INDEX[(u, v)])

    return sorted(unique, key=rank)


# ---------------------------------------------------------------------------
# scheme 2


@dataclass(frozen=True)
class FourCycleSplit:
    """Shared edge u->v of the two 3-cycles inside a 4-cycle condition.

    ``a`` closes u->v->a->u (its chord leaves v), ``b`` closes u->v->b->u (its
    chord enters u).
    """

    u: int
    v: int
    a: int
    b: int


def shared_edges(r: RateTuple, cond: Condition) -> list[FourCycleSplit]:
    if cond.family is not Family.EXTRA_7:
        raise ValueError(f"{cond.id} is not a 4-cycle condition")
    c = cond.cycle
    chords = set()
    for x, y in ((c[0], c[2]), (c[1], c[3])):
        if r[(x, y)] >= r[(y, x)]:
            chords.add((x, y))
        if r[(y, x)] >= r[(x, y)]:
            chords.add((y, x))
    out = []
    for s in range(4):
        u, v, b, a = c[s], c[(s + 1) % 4], c[(s + 2) % 4], c[(s + 3) % 4]
        if (v, a) in chords and (b, u) in chords:
            out.append(FourCycleSplit(u, v, a, b))
    return out


def cycle_split(r: RateTuple, sp: FourCycleSplit, g: GainVector) -> tuple[int, int]:
    """beta, gamma read off the two 3-cycle conditions through the shared edge."""
    u, v, a, b = sp.u, sp.v, sp.a, sp.b
    beta = r[(u, v)] + r[(v, a)] + r[(a, u)] + r[(b, u)] + r[(b, v)] + r[(b, a)] - g[1]
    gamma = r[(u, v)] + r[(v, b)] + r[(b, u)] + r[(b, a)] + r[(v, a)] + r[(u, a)] - g[1]
    return beta, gamma


def split_range(r: RateTuple, sp: FourCycleSplit, lam: int) -> tuple[int, int]:
    """Feasible beta interval: each route may only raise rates up to their reverses.

    The route via a raises R_ua and R_av (reverses of a->u and v->a); the route
    via b raises R_ub and R_bv (reverses of b->u and v->b).
    """
    cap_a = max(0, min(_slack(r, (sp.a, sp.u)), _slack(r, (sp.v, sp.a))))
    cap_b = max(0, min(_slack(r, (sp.b, sp.u)), _slack(r, (sp.v, sp.b))))
    return max(0, lam - cap_b), min(cap_a, lam)


def _ds2_step(cond_id: str, lam: int, sp: FourCycleSplit, beta: int, gamma: int,
              note: str = "") -> Step:
    moves = []
    if beta:
        moves.append(((sp.u, sp.v, sp.a), beta))
    if gamma:
        moves.append(((sp.u, sp.v, sp.b), gamma))
    return Step(Scheme.DS2, cond_id, lam, beta, gamma, tuple(moves), note)


def ds2_candidates(r: RateTuple, mgc: Gap, g: GainVector) -> list[Step]:
    """Every admissible (shared edge, split) for a 4-cycle condition, preferred first.

    The split read off the two 3-cycle conditions is tried first when it is a
    valid decomposition; otherwise splits inside :func:`split_range` follow,
    most balanced first.
    """
    lam = mgc.gap
    if lam < 1:
        return []
    out = []
    for sp in shared_edges(r, mgc.condition):
        pb, pg = cycle_split(r, sp, g)
        lo, hi = split_range(r, sp, lam)
        if pb >= 0 and pg >= 0 and pb + pg == lam:
            out.append(_ds2_step(mgc.condition_id, lam, sp, pb, pg))
            note = ""
        else:
            note = f"cycle-condition split beta={pb}, gamma={pg} does not sum to lambda={lam}"
        betas = sorted(range(lo, hi + 1), key=lambda b: (abs(2 * b - lam), b))
        for beta in betas:
            st = _ds2_step(mgc.condition_id, lam, sp, beta, lam - beta, note)
            if all(st.moves != o.moves for o in out):
                out.append(st)
    return out


def apply_ds2(r: RateTuple, mgc: Gap, g: GainVector) -> Step:
    cands = ds2_candidates(r, mgc, g)
    if not cands:
        raise DecompositionFailure(
            f"no split of lambda={mgc.gap} fits the shared-edge detour for {mgc.condition_id} at {r}")
    return cands[0]


def candidates(r: RateTuple, mgc: Gap, g: GainVector) -> list[Step]:
    if mgc.condition.family is Family.EXTRA_7:
        return ds2_candidates(r, mgc, g)
    return apply_ds1(r, mgc, g)


# ---------------------------------------------------------------------------
# planner


def _score(rep: MembershipReport) -> tuple[int, int, int]:
    gaps = [gp.gap for gp in rep.extra_violated]
    return (max(gaps, default=0), len(gaps), sum(gaps))


def plan(r: RateTuple, g: GainVector, max_iterations: int = MAX_ITERATIONS,
         search_budget: int = SEARCH_STATE_BUDGET) -> DetourPlan:
    """Find an equivalent directly-schedulable tuple for a region member."""
    rep = check(r, g)
    if not rep.in_region:
        raise NotInRegion(f"{r} violates " + ", ".join(gp.condition_id for gp in rep.violated))
    if rep.sos_feasible:
        return identity_plan(r)

    counts: dict[Reroute, int] = {}
    steps: list[Step] = []
    notes: list[str] = []
    trace: list[dict] = []
    for _ in range(max_iterations):
        cur = equivalent_rates(r, counts)
        rep = check(cur, g)
        if rep.sos_feasible:
            return _finish(r, counts, steps, notes=notes)
        mgc = rep.mgc
        best = None
        for k, st in enumerate(candidates(cur, mgc, g)):
            if st.note and st.note not in notes:
                notes.append(st.note)
            new = _merge(counts, st.moves)
            if not _valid_counts(r, new):
                continue
            rep2 = check(equivalent_rates(r, new), g)
            if rep2.sos_feasible:
                return _finish(r, new, steps + [st], notes=notes)
            if rep2.in_region and (best is None or _score(rep2) < best[0]):
                best = (_score(rep2), st, new)
        trace.append({"rates": list(cur), "mgc": mgc.condition_id, "gap": mgc.gap,
                      "accepted": best[1].as_dict() if best else None})
        if best is None:
            break
        _, st, counts = best
        steps.append(st)

    log.info("detour schemes did not resolve %s; falling back to search", r)
    return fallback_search(r, g, budget=search_budget, trace=trace)


def fallback_search(r: RateTuple, g: GainVector, budget: int = SEARCH_STATE_BUDGET,
                    trace: list | None = None) -> DetourPlan:
    """Breadth-first search over unit detours of original bits."""
    if check(r, g).sos_feasible:
        return _finish(r, {}, [], scheme=Scheme.SEARCH)
    moves: list[Reroute] = [(u, v, w) for (u, v) in STREAMS for w in NODES if w not in (u, v)]
    start: tuple[tuple[Reroute, int], ...] = ()
    frontier = deque([start])
    seen = {start}
    depth_cap = r.total()
    while frontier:
        state = frontier.popleft()
        counts = dict(state)
        if sum(counts.values()) >= depth_cap:
            continue
        for mv in moves:
            if rerouted_total(counts, mv[:2]) >= r[mv[:2]]:
                continue
            new = _merge(counts, [(mv, 1)])
            key = tuple(sorted(new.items()))
            if key in seen:
                continue
            seen.add(key)
            if check(equivalent_rates(r, new), g).sos_feasible:
                lam = check(r, g).mgc.gap
                st = Step(Scheme.SEARCH, "search", lam, 0, 0, key)
                return _finish(r, new, [st], scheme=Scheme.SEARCH)
            if len(seen) > budget:
                raise NoPlanFound(f"search budget exhausted for {r}", _witness(r, g, trace, len(seen)))
            frontier.append(key)
    raise NoPlanFound(f"no detour sequence makes {r} directly schedulable",
                      _witness(r, g, trace, len(seen)))


def _witness(r: RateTuple, g: GainVector, trace, explored: int) -> dict:
    return {"gains": list(g), "rates": r.as_dict(), "trace": trace or [], "states_explored": explored}


def delivered_demand(p: DetourPlan) -> dict[Stream, int]:
    """End-to-end bits per original stream reconstructed from the equivalent rates.

    Each equivalent stream a->b carries direct a->b bits, first hops of bits
    a->x routed via b, and second hops of bits x->b routed via a. Removing the
    hop traffic must leave exactly the direct demand.
    """
    counts = p.reroute_counts()
    hop = defaultdict(int)
    for (u, v, w), c in counts.items():
        hop[(u, w)] += c
        hop[(w, v)] += c
    out = {}
    for s in STREAMS:
        direct = p.equivalent[s] - hop[s]
        out[s] = direct + rerouted_total(counts, s)
    return out


def plan_from_dict(doc: dict) -> DetourPlan:
    """Rebuild a plan from :meth:`DetourPlan.as_dict` output without re-planning."""
    original = RateTuple.from_mapping(doc["original"])
    counts: dict[Reroute, int] = {}
    for rr in doc.get("reroutes", []):
        u, v = rr["stream"]
        counts[(int(u), int(v), int(rr["via"]))] = int(rr["count"])
    steps = []
    for st in doc.get("steps", []):
        moves = tuple(((int(m["stream"][0]), int(m["stream"][1]), int(m["via"])), int(m["count"]))
                      for m in st["moves"])
        steps.append(Step(Scheme(st["scheme"]), st["condition"], int(st["lambda"]), int(st["beta"]),
                          int(st["gamma"]), moves, st.get("note", "")))
    if not _valid_counts(original, counts):
        raise ValueError("plan reroutes more bits than the original streams carry")
    p = _finish(original, counts, steps, scheme=Scheme(doc["scheme"]), notes=doc.get("notes", ()))
    if "equivalent" in doc and RateTuple.from_mapping(doc["equivalent"]) != p.equivalent:
        raise ValueError("plan's equivalent rates do not match its reroutes")
    return p
