"""Command-line entry point: ``relay4 <check|bounds|schedule|plan|simulate|sweep>``.

Instances come from a YAML/JSON file, standard input, or ``--gains``/``--rates``.
Reports go to standard output as YAML, or JSON with ``--json``. Exit status is
0 on success, 1 when the instance is infeasible or a check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from . import channel, detour, genie, region, scheduler, sweep
from .model import RATE_KEYS, GainVector, RateTuple, Relabeling, canonicalize, stream_name

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
EXHAUSTIVE_BOX_CAP = 5_000_000


class InputError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _nonneg_int(value: Any, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(field, f"expected a non-negative integer, got {value!r}")
    if value < 0:
        raise InputError(field, f"must be non-negative, got {value}")
    return value


@dataclass(frozen=True)
class ProblemInstance:
    gains: tuple[int, int, int, int]
    rates: RateTuple
    seed: int | None = None
    rounds: int | None = None

    @classmethod
    def from_dict(cls, doc: Any) -> "ProblemInstance":
        if not isinstance(doc, dict):
            raise InputError("instance", "expected a mapping with 'gains' and 'rates'")
        unknown = set(doc) - {"gains", "rates", "seed", "rounds"}
        if unknown:
            raise InputError(sorted(unknown)[0], "unknown field")
        if "gains" not in doc:
            raise InputError("gains", "missing")
        gains = doc["gains"]
        if not isinstance(gains, (list, tuple)) or len(gains) != 4:
            raise InputError("gains", f"expected 4 integers, got {gains!r}")
        gains = tuple(_nonneg_int(v, f"gains[{k}]") for k, v in enumerate(gains))
        raw = doc.get("rates") or {}
        if not isinstance(raw, dict):
            raise InputError("rates", "expected a mapping with keys r12..r43")
        vals = {}
        for key, v in raw.items():
            name = str(key).lower()
            if name not in RATE_KEYS:
                raise InputError(f"rates.{key}", "unknown stream key")
            vals[name] = _nonneg_int(v, f"rates.{key}")
        seed = doc.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            raise InputError("seed", f"expected an integer, got {seed!r}")
        rounds = doc.get("rounds")
        if rounds is not None:
            rounds = _nonneg_int(rounds, "rounds")
            if rounds < 2:
                raise InputError("rounds", "need at least 2 rounds")
        return cls(gains, RateTuple.from_mapping(vals), seed, rounds)

    def as_dict(self) -> dict:
        d: dict = {"gains": list(self.gains), "rates": self.rates.as_dict()}
        if self.seed is not None:
            d["seed"] = self.seed
        if self.rounds is not None:
            d["rounds"] = self.rounds
        return d


@dataclass(frozen=True)
class Canonical:
    instance: ProblemInstance
    gains: GainVector
    rates: RateTuple
    relabel: Relabeling

    @classmethod
    def of(cls, inst: ProblemInstance) -> "Canonical":
        g, r, rl = canonicalize(inst.gains, inst.rates)
        return cls(inst, g, r, rl)

    def labels(self) -> dict:
        return {"original_gains": list(self.instance.gains), "canonical_gains": list(self.gains),
                "to_canonical": self.relabel.as_dict()}

    def original_name(self, s) -> str:
        return stream_name(self.relabel.stream_to_original(s))


# ---------------------------------------------------------------------------
# input


def _load(args) -> Any:
    if args.input not in (None, "-"):
        path = Path(args.input)
        if not path.exists():
            raise InputError("input", f"no such file: {path}")
        text = path.read_text()
    elif args.gains is not None:
        return None
    else:
        text = sys.stdin.read()
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError("input", f"not valid YAML/JSON: {exc}") from None


def _instance(args, doc: Any = None) -> ProblemInstance:
    if args.gains is not None:
        d: dict = {"gains": args.gains}
        if args.rates is not None:
            if len(args.rates) != 12:
                raise InputError("rates", f"expected 12 integers in order {' '.join(RATE_KEYS)}")
            d["rates"] = dict(zip(RATE_KEYS, args.rates))
        return ProblemInstance.from_dict(d)
    if doc is None:
        doc = _load(args)
    return ProblemInstance.from_dict(doc)


def _apply_overrides(inst: ProblemInstance, args) -> tuple[int, int]:
    rounds = args.rounds if args.rounds is not None else inst.rounds or 10
    seed = args.seed if args.seed is not None else inst.seed or 0
    if rounds < 2:
        raise InputError("rounds", "need at least 2 rounds")
    return rounds, seed


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> tuple[dict, int]:
    c = Canonical.of(_instance(args))
    rep = region.check(c.rates, c.gains)
    if not rep.in_region:
        hint = "outside-region"
    elif c.rates.total() == 0:
        hint = "empty"
    else:
        hint = "direct" if rep.sos_feasible else "detour"
    doc = {"command": "check", "labels": c.labels(), "rates": c.instance.rates.as_dict(),
           "canonical_rates": c.rates.as_dict(), "membership": rep.as_dict(), "schedule_hint": hint}
    return doc, EXIT_OK if rep.in_region else EXIT_FAIL


def _equivalence(g: GainVector, samples: int, seed: int) -> dict:
    box = math.prod(m + 1 for m in genie.bounding_box(g, 1))
    if box <= EXHAUSTIVE_BOX_CAP:
        rep = genie.EquivalenceReport(g, 0, 0, [])
        for chunk in genie.iter_box(g, 1):
            part = genie.equivalence_check(g, chunk)
            rep.examined += part.examined
            rep.members += part.members
            rep.disagreements += part.disagreements
        return {"mode": "exhaustive", **rep.as_dict()}
    _, drawn = sweep.RegionSampler(g, seed).sample(samples)
    witnesses = list(sweep.boundary_witnesses(g, seed).values())
    rep = genie.equivalence_check(g, drawn)
    edge = genie.equivalence_check(g, witnesses)
    rep.examined += edge.examined
    rep.members += edge.members
    rep.disagreements += edge.disagreements
    return {"mode": "sampled", **rep.as_dict()}


def cmd_bounds(args) -> tuple[dict, int]:
    if args.list:
        return {"command": "bounds", "conditions": region.catalog()}, EXIT_OK
    c = Canonical.of(_instance(args))
    bounds = genie.all_bounds(c.gains)
    equiv = _equivalence(c.gains, args.samples, args.seed or 0)
    doc = {"command": "bounds", "labels": c.labels(), "count": len(bounds),
           "bounds": [b.as_record() for b in bounds], "equivalence": equiv}
    return doc, EXIT_OK if equiv["equivalent"] else EXIT_FAIL


def cmd_schedule(args) -> tuple[dict, int]:
    c = Canonical.of(_instance(args))
    head = {"command": "schedule", "labels": c.labels(), "rates": c.instance.rates.as_dict(),
            "canonical_rates": c.rates.as_dict()}
    try:
        sched = scheduler.build_schedule(c.rates, c.gains)
    except scheduler.InfeasibleSchedule as exc:
        rep = region.check(c.rates, c.gains)
        guidance = ("run `relay4 plan` to find a detoured equivalent tuple" if rep.in_region
                    else "the rates lie outside the capacity region")
        return {**head, "error": "InfeasibleSchedule", "message": str(exc), "guidance": guidance,
                "membership": rep.as_dict()}, EXIT_FAIL
    return {**head, "schedule": sched.as_dict()}, EXIT_OK


def _original_view(c: Canonical, p: detour.DetourPlan) -> dict:
    rl = c.relabel
    return {
        "equivalent": rl.rates_to_original(p.equivalent).as_dict(),
        "deltas": [{"stream": c.original_name(d.stream), "delta": d.delta} for d in p.deltas],
        "reroutes": [{"stream": list(rl.stream_to_original(rp.stream)), "via": rl.node_to_original(rp.via),
                      "count": rp.count} for rp in p.reroutes],
    }


def cmd_plan(args) -> tuple[dict, int]:
    c = Canonical.of(_instance(args))
    head = {"command": "plan", "instance": c.instance.as_dict(), "labels": c.labels()}
    try:
        p = detour.plan(c.rates, c.gains)
    except detour.NotInRegion as exc:
        return {**head, "error": "NotInRegion", "message": str(exc),
                "membership": region.check(c.rates, c.gains).as_dict()}, EXIT_FAIL
    except detour.NoPlanFound as exc:
        return {**head, "error": "NoPlanFound", "message": str(exc), "witness": exc.witness}, EXIT_FAIL
    return {**head, "plan": p.as_dict(), "original_labels": _original_view(c, p)}, EXIT_OK


def cmd_simulate(args) -> tuple[dict, int]:
    doc = None if args.gains is not None else _load(args)
    if isinstance(doc, dict) and doc.get("command") == "plan":
        if "plan" not in doc:
            raise InputError("plan", "plan document carries no plan (it reported an error)")
        inst = ProblemInstance.from_dict(doc.get("instance"))
        c = Canonical.of(inst)
        try:
            p = detour.plan_from_dict(doc["plan"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError("plan", str(exc)) from None
        if p.original != c.rates:
            raise InputError("plan.original", "does not match the instance's canonical rates")
    else:
        inst = _instance(args, doc)
        c = Canonical.of(inst)
        try:
            p = detour.plan(c.rates, c.gains)
        except detour.NotInRegion as exc:
            return {"command": "simulate", "labels": c.labels(), "error": "NotInRegion",
                    "message": str(exc)}, EXIT_FAIL
        except detour.NoPlanFound as exc:
            return {"command": "simulate", "labels": c.labels(), "error": "NoPlanFound",
                    "message": str(exc), "witness": exc.witness}, EXIT_FAIL
    rounds, seed = _apply_overrides(inst, args)
    try:
        sched = scheduler.build_schedule(p.equivalent, c.gains)
    except scheduler.InfeasibleSchedule as exc:
        return {"command": "simulate", "labels": c.labels(), "error": "InfeasibleSchedule",
                "message": str(exc)}, EXIT_FAIL
    rep = channel.run_session(p, sched, c.gains, rounds, seed, trace=args.trace)
    doc = {"command": "simulate", "labels": c.labels(), "scheme": p.scheme.value,
           "equivalent": p.equivalent.as_dict(), "delivery": rep.as_dict(with_trace=args.trace)}
    return doc, EXIT_OK if rep.success else EXIT_FAIL


def cmd_sweep(args) -> tuple[dict, int]:
    inst = _instance(args)
    c = Canonical.of(inst)
    mode = args.mode
    if mode is None:
        box = math.prod(m + 1 for m in genie.bounding_box(c.gains))
        mode = "exhaustive" if box <= sweep.ENUMERATION_CAP else "random"
    seed = args.seed if args.seed is not None else inst.seed or 0
    rounds = args.rounds if args.rounds is not None else inst.rounds or 4
    if mode == "exhaustive":
        try:
            rep = sweep.achievability_sweep(c.gains, rounds=rounds, seed=seed, threads=args.threads)
        except sweep.TooLarge as exc:
            raise InputError("mode", f"exhaustive sweep too large: {exc}") from None
    else:
        rep = sweep.random_sweep(c.gains, args.count, seed, rounds=rounds, threads=args.threads)
    if args.artifacts:
        _write_artifacts(Path(args.artifacts), rep)
    doc = {"command": "sweep", "mode": mode, "labels": c.labels(), "report": rep.as_dict()}
    return doc, EXIT_OK if rep.ok else EXIT_FAIL


def _write_artifacts(out: Path, rep: sweep.SweepReport) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for k, w in enumerate(rep.counterexamples):
        (out / f"no_plan_found_{k:04d}.yaml").write_text(yaml.safe_dump(w, sort_keys=False))
    for k, f in enumerate(rep.failures):
        (out / f"simulation_failure_{k:04d}.yaml").write_text(yaml.safe_dump(f, sort_keys=False))


# ---------------------------------------------------------------------------
# dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relay4", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", nargs="?", help="instance file (YAML or JSON); '-' or omitted reads stdin")
        p.add_argument("--gains", type=int, nargs=4, metavar="N", help="inline gains n1 n2 n3 n4")
        p.add_argument("--rates", type=int, nargs="+", metavar="R",
                       help="inline rates in order " + " ".join(RATE_KEYS))
        p.add_argument("--json", action="store_true", help="emit JSON instead of YAML")

    p = sub.add_parser("check", help="region membership and the maximum gap condition")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bounds", help="genie cut-set bounds and their equivalence with the region")
    common(p)
    p.add_argument("--list", action="store_true", help="print the condition catalog only")
    p.add_argument("--samples", type=int, default=10_000, help="region samples when the box is too large")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("schedule", help="direct level schedule")
    common(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("plan", help="detour plan to a directly schedulable tuple")
    common(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="bit-exact simulation; accepts an instance or a plan document")
    common(p)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", action="store_true", help="include per-round level tables")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="achievability sweep at fixed gains")
    common(p)
    p.add_argument("--mode", choices=["exhaustive", "random"], default=None)
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--artifacts", metavar="DIR", help="write counterexamples and failures here")
    p.set_defaults(func=cmd_sweep)
    return parser


def emit(doc: dict, as_json: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if as_json:
        json.dump(doc, stream, indent=2)
        stream.write("\n")
    else:
        yaml.safe_dump(doc, stream, sort_keys=False, default_flow_style=None, width=4096)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command == "bounds" and args.list:
        pass
    elif args.rates is not None and args.gains is None:
        emit({"error": "InputError", "field": "gains", "message": "--rates needs --gains"}, args.json)
        return EXIT_INPUT
    try:
        doc, code = args.func(args)
    except InputError as exc:
        emit({"error": "InputError", "field": exc.field, "message": str(exc)}, args.json)
        return EXIT_INPUT
    emit(doc, args.json)
    return code


if __name__ == "__main__":
    sys.exit(main())
