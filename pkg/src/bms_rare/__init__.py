"""Rare-event search over a battery-charging simulator using optimistic optimization."""

from bms_rare.criticality import CriticalitySpec, ParamSpace
from bms_rare.model import ControlLimits, SimOutcome, SimParams, simulate
from bms_rare.objective import Objective

__all__ = [
    "ControlLimits",
    "CriticalitySpec",
    "Objective",
    "ParamSpace",
    "SimOutcome",
    "SimParams",
    "simulate",
]

__version__ = "0.1.0"
