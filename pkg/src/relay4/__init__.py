"""Deterministic capacity of the 4-node bidirectional relay network.

Region membership, genie cut-set bounds, bit-level level scheduling, detour
planning and a bit-exact channel simulator, wired together by ``relay4.cli``.
"""

from .detour import DetourPlan, NoPlanFound, plan
from .model import GainVector, RateTuple, canonicalize
from .region import check, in_region
from .scheduler import InfeasibleSchedule, Schedule, build_schedule, sos_feasible

__all__ = [
    "DetourPlan", "GainVector", "InfeasibleSchedule", "NoPlanFound", "RateTuple", "Schedule",
    "build_schedule", "canonicalize", "check", "in_region", "plan", "sos_feasible",
]
__version__ = "0.1.0"
