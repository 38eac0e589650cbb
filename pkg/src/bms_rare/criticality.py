"""Test space, criticality functions and the critical-event predicate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from bms_rare.errors import ConfigError


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float
    unit: str = ""


def _default_dims() -> tuple[Dimension, ...]:
    return (
        Dimension("t_amb", -5.0, 40.0, "degC"),
        Dimension("i_max", 10.0, 100.0, "A"),
    )


@dataclass(frozen=True)
class ParamSpace:
    """Axis-aligned box of physical parameters; the search runs on its unit cube."""

    dims: tuple[Dimension, ...] = field(default_factory=_default_dims)

    def __post_init__(self):
        if not self.dims:
            raise ConfigError("space", "at least one dimension required")
        for d in self.dims:
            if not (math.isfinite(d.lower) and math.isfinite(d.upper)) or d.lower >= d.upper:
                raise ConfigError(f"space.{d.name}", f"need lower < upper, got [{d.lower}, {d.upper}]")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def lower(self) -> np.ndarray:
        return np.array([d.lower for d in self.dims])

    @property
    def upper(self) -> np.ndarray:
        return np.array([d.upper for d in self.dims])


def denormalize(u: Sequence[float], space: ParamSpace) -> np.ndarray:
    """Map a point of the unit cube to physical coordinates."""
    u = np.asarray(u, dtype=float)
    if u.shape != (space.ndim,):
        raise ValueError(f"expected {space.ndim} coordinates, got shape {u.shape}")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError(f"point {u.tolist()} outside the unit cube")
    lo, hi = space.lower, space.upper
    return lo + u * (hi - lo)


@dataclass(frozen=True)
class CriticalitySpec:
    c_kappa: float = 0.8
    t_fatal_h: float = 9.0
    t_min_h: float = 0.0
    temp_fatal_c: float = 63.75
    temp_min_c: float = -5.0

    def __post_init__(self):
        if not 0.0 < self.c_kappa < 1.0:
            raise ConfigError("crit.c_kappa", "must lie in (0, 1)")
        if not self.t_min_h < self.t_fatal_h:
            raise ConfigError("crit.t_fatal_h", "must exceed crit.t_min_h")
        if not self.temp_min_c < self.temp_fatal_c:
            raise ConfigError("crit.temp_fatal_c", "must exceed crit.temp_min_c")


DEFAULT_CRIT = CriticalitySpec()


def kappa_time(t_charge_h: float, spec: CriticalitySpec = DEFAULT_CRIT) -> float:
    k = (t_charge_h - spec.t_min_h) / (spec.t_fatal_h - spec.t_min_h)
    return min(max(k, 0.0), 1.0)


def kappa_temp(t_bat_c: float, spec: CriticalitySpec = DEFAULT_CRIT) -> float:
    # lower clamp keeps the objective total if the pack cools below temp_min
    k = (t_bat_c - spec.temp_min_c) / (spec.temp_fatal_c - spec.temp_min_c)
    return min(max(k, 0.0), 1.0)


def kappa_combine(k_time: float, k_temp: float) -> float:
    return max(k_time, k_temp)


def is_critical(kappa: float, spec: CriticalitySpec = DEFAULT_CRIT) -> bool:
    return kappa >= spec.c_kappa


def criticality_monitor(spec: CriticalitySpec = DEFAULT_CRIT):
    """Per-step monitor: combined criticality of elapsed time and current pack temperature."""

    def monitor(state) -> float:
        return kappa_combine(kappa_time(state.t / 3600.0, spec), kappa_temp(state.t_bat, spec))

    return monitor
