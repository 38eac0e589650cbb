"""The objective every search strategy consumes: unit-cube point -> peak criticality."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from bms_rare import _kernel
from bms_rare.criticality import CriticalitySpec, ParamSpace, denormalize, is_critical
from bms_rare.errors import SimulationError
from bms_rare.model import ControlLimits, SimParams, simulate


class Objective:
    """Denormalize, simulate one charging process, report the highest monitored criticality.

    ``engine="compiled"`` runs the numba kernel; ``engine="reference"`` runs
    the step-by-step Python simulator. Both give identical values.
    """

    def __init__(
        self,
        sim: SimParams = SimParams(),
        limits: ControlLimits = ControlLimits(),
        space: ParamSpace = ParamSpace(),
        crit: CriticalitySpec = CriticalitySpec(),
        engine: str = "compiled",
    ):
        if space.ndim != 2:
            raise ValueError("the charging model takes exactly two parameters (t_amb, i_max)")
        if engine not in ("compiled", "reference"):
            raise ValueError(f"unknown engine {engine!r}")
        self.sim, self.limits, self.space, self.crit = sim, limits, space, crit
        self.engine = engine
        self._packed = _kernel.pack(sim, limits, crit)
        self.calls = 0

    def physical(self, u: Sequence[float]) -> np.ndarray:
        return denormalize(u, self.space)

    def __call__(self, u: Sequence[float]) -> float:
        return self.evaluate(u)

    def evaluate(self, u: Sequence[float]) -> float:
        t_amb, i_max = self.physical(u)
        self.calls += 1
        if self.engine == "reference":
            return simulate(t_amb, i_max, self.sim, self.limits, crit=self.crit).kappa_peak
        kp, _, _, _, _, bad = _kernel.run_one(float(t_amb), float(i_max), *self._packed)
        if bad >= 0:
            raise SimulationError(int(bad), f"non-finite state at t_amb={t_amb}, i_max={i_max}; check SimParams")
        return float(kp)

    def evaluate_many(self, units: np.ndarray) -> np.ndarray:
        """Vectorised evaluation of an (n, 2) array of unit points."""
        units = np.asarray(units, dtype=float).reshape(-1, 2)
        if np.any(units < 0) or np.any(units > 1):
            raise ValueError("points outside the unit cube")
        phys = self.space.lower + units * (self.space.upper - self.space.lower)
        self.calls += len(units)
        if self.engine == "reference":
            return np.array([simulate(a, b, self.sim, self.limits, crit=self.crit).kappa_peak for a, b in phys])
        out, bad = _kernel.run_batch(np.ascontiguousarray(phys), *self._packed)
        if np.any(bad >= 0):
            j = int(np.argmax(bad >= 0))
            raise SimulationError(int(bad[j]), f"non-finite state at {phys[j].tolist()}; check SimParams")
        return out

    def is_critical(self, kappa: float) -> bool:
        return is_critical(kappa, self.crit)
