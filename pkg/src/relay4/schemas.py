"""JSON Schemas for the documents the command line reads and writes.

The same structures are emitted as YAML (default) or JSON (``--json``).
"""

from __future__ import annotations

from .model import RATE_KEYS

_int = {"type": "integer"}
_nonneg = {"type": "integer", "minimum": 0}
_gains = {"type": "array", "items": _nonneg, "minItems": 4, "maxItems": 4}
_rates = {
    "type": "object",
    "properties": {k: _nonneg for k in RATE_KEYS},
    "required": list(RATE_KEYS),
    "additionalProperties": False,
}
_stream_pair = {"type": "array", "items": _int, "minItems": 2, "maxItems": 2}

INSTANCE = {
    "type": "object",
    "properties": {
        "gains": _gains,
        "rates": {"type": "object", "properties": {k: _nonneg for k in RATE_KEYS},
                  "additionalProperties": False},
        "seed": _int,
        "rounds": {"type": "integer", "minimum": 2},
    },
    "required": ["gains"],
    "additionalProperties": False,
}

LABELS = {
    "type": "object",
    "properties": {
        "original_gains": _gains,
        "canonical_gains": _gains,
        "to_canonical": {"type": "object", "additionalProperties": _int},
    },
    "required": ["original_gains", "canonical_gains", "to_canonical"],
}

_gap = {
    "type": "object",
    "properties": {"condition": {"type": "string"}, "family": {"type": "string"},
                   "inequality": {"type": "string"}, "lhs": _int, "rhs": _int, "gap": _int},
    "required": ["condition", "family", "lhs", "rhs", "gap"],
}

MEMBERSHIP = {
    "type": "object",
    "properties": {
        "in_region": {"type": "boolean"},
        "sos_feasible": {"type": "boolean"},
        "violated": {"type": "array", "items": _gap},
        "extra_violated": {"type": "array", "items": _gap},
        "mgc": {"anyOf": [_gap, {"type": "null"}]},
    },
    "required": ["in_region", "sos_feasible", "violated", "extra_violated", "mgc"],
}

CHECK_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "check"},
        "labels": LABELS,
        "rates": _rates,
        "canonical_rates": _rates,
        "membership": MEMBERSHIP,
        "schedule_hint": {"enum": ["empty", "direct", "detour", "outside-region"]},
    },
    "required": ["command", "labels", "rates", "canonical_rates", "membership", "schedule_hint"],
}

BOUNDS_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "bounds"},
        "labels": LABELS,
        "count": _nonneg,
        "bounds": {"type": "array", "items": {
            "type": "object",
            "properties": {"phase": {"enum": ["UPLINK", "DOWNLINK"]}, "side": {"type": "array"},
                           "genie_order": {"type": "array"}, "inequality": {"type": "string"},
                           "rhs": _int},
            "required": ["phase", "side", "genie_order", "inequality", "rhs"]}},
        "equivalence": {"type": "object", "properties": {
            "examined": _nonneg, "members": _nonneg, "disagreements": _nonneg,
            "equivalent": {"type": "boolean"}},
            "required": ["examined", "disagreements", "equivalent"]},
    },
    "required": ["command", "labels", "count", "bounds", "equivalence"],
}

CATALOG_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "bounds"},
        "conditions": {"type": "array", "items": {
            "type": "object",
            "properties": {"id": {"type": "string"}, "family": {"type": "string"},
                           "inequality": {"type": "string"}},
            "required": ["id", "family", "inequality"]}},
    },
    "required": ["command", "conditions"],
}

SCHEDULE_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "schedule"},
        "labels": LABELS,
        "rates": _rates,
        "canonical_rates": _rates,
        "schedule": {"type": "object", "properties": {
            "gains": _gains,
            "rates": _rates,
            "segment_sizes": {"type": "object", "additionalProperties": _nonneg},
            "relay_perm": {"type": "object", "additionalProperties": _int},
            "rows": {"type": "array", "items": {
                "type": "object",
                "properties": {"phase": {"enum": ["uplink", "downlink"]}, "level": _int,
                               "content": {"type": "string"}},
                "required": ["phase", "level", "content"]}},
        }, "required": ["gains", "rates", "segment_sizes", "relay_perm", "rows"]},
    },
    "required": ["command", "labels", "schedule"],
}

_plan = {
    "type": "object",
    "properties": {
        "scheme": {"enum": ["IDENTITY", "DS1", "DS2", "MIXED", "SEARCH"]},
        "original": _rates,
        "equivalent": _rates,
        "lambda": _nonneg, "beta": _nonneg, "gamma": _nonneg,
        "deltas": {"type": "array", "items": {"type": "object", "properties": {
            "stream": {"type": "string"}, "delta": _int}, "required": ["stream", "delta"]}},
        "reroutes": {"type": "array", "items": {"type": "object", "properties": {
            "stream": _stream_pair, "via": _int, "count": {"type": "integer", "minimum": 1},
            "bit_indices": {"type": "array", "items": _nonneg}},
            "required": ["stream", "via", "count", "bit_indices"]}},
        "steps": {"type": "array"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["scheme", "original", "equivalent", "lambda", "beta", "gamma", "deltas", "reroutes"],
}

PLAN_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "plan"},
        "instance": INSTANCE,
        "labels": LABELS,
        "plan": _plan,
        "original_labels": {"type": "object", "properties": {
            "equivalent": _rates, "deltas": {"type": "array"}, "reroutes": {"type": "array"}},
            "required": ["equivalent", "deltas", "reroutes"]},
    },
    "required": ["command", "instance", "labels", "plan", "original_labels"],
}

SIMULATE_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "simulate"},
        "labels": LABELS,
        "scheme": {"type": "string"},
        "equivalent": _rates,
        "delivery": {"type": "object", "properties": {
            "success": {"type": "boolean"},
            "rounds": {"type": "integer", "minimum": 2},
            "seed": _int,
            "streams": {"type": "object", "additionalProperties": {
                "type": "object",
                "properties": {"delivered": _nonneg, "expected": _nonneg,
                               "latency": {"type": "object", "additionalProperties": _nonneg}},
                "required": ["delivered", "expected", "latency"]}},
            "failures": {"type": "array"},
            "trace": {"type": "array"},
        }, "required": ["success", "rounds", "seed", "streams", "failures"]},
    },
    "required": ["command", "labels", "scheme", "equivalent", "delivery"],
}

SWEEP_REPORT = {
    "type": "object",
    "properties": {
        "command": {"const": "sweep"},
        "mode": {"enum": ["exhaustive", "random"]},
        "report": {"type": "object", "properties": {
            "gains": _gains,
            "tuples_examined": _nonneg,
            "in_region": _nonneg,
            "sos_direct": _nonneg,
            "detoured": {"type": "object", "additionalProperties": _nonneg},
            "simulation_failures": {"type": "array"},
            "no_plan_found": {"type": "array"},
            "bound_equivalence": {"anyOf": [{"type": "object"}, {"type": "null"}]},
            "wall_time_s": {"type": "number"},
            "ok": {"type": "boolean"},
        }, "required": ["gains", "tuples_examined", "in_region", "sos_direct", "detoured",
                        "simulation_failures", "no_plan_found", "ok"]},
    },
    "required": ["command", "mode", "report"],
}

ERROR_REPORT = {
    "type": "object",
    "properties": {"error": {"type": "string"}, "message": {"type": "string"}},
    "required": ["error", "message"],
}

SCHEMAS = {
    "instance": INSTANCE,
    "check": CHECK_REPORT,
    "bounds": BOUNDS_REPORT,
    "catalog": CATALOG_REPORT,
    "schedule": SCHEDULE_REPORT,
    "plan": PLAN_REPORT,
    "simulate": SIMULATE_REPORT,
    "sweep": SWEEP_REPORT,
    "error": ERROR_REPORT,
}
