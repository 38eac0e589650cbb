"""Fixed-step battery charging model.

Four components are stepped once per communication step in a fixed order
(approval, management, station, battery voltage, SoC, temperature); each one
reads the values the previous components already produced in the same step.
The battery temperature follows a lumped heat balance integrated with
explicit Euler, SoC is obtained by coulomb counting and the terminal voltage
by a linear OCV model.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields
from enum import IntEnum
from pathlib import Path
from typing import Callable, Optional, Sequence

from bms_rare.criticality import CriticalitySpec, criticality_monitor
from bms_rare.errors import ConfigError, SimulationError


class Control(IntEnum):
    CHARGING = 0
    RESTING = 1
    DISCHARGING = 2

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class RFactorCell:
    """Multiplier on the internal resistance over a (SoC, current) rectangle."""

    soc_lo: float
    soc_hi: float
    factor: float
    i_lo: float = 0.0
    i_hi: float = math.inf


@dataclass(frozen=True)
class RFactorTable:
    """Piecewise-constant resistance factors.

    Cells are half-open ``[lo, hi)`` per axis, except that a cell whose upper
    bound is the largest upper bound of the table on that axis is closed there.
    Points outside every cell get factor 1.
    """

    cells: tuple[RFactorCell, ...] = ()

    def __post_init__(self):
        for k, c in enumerate(self.cells):
            if not (c.soc_lo < c.soc_hi and c.i_lo < c.i_hi):
                raise ConfigError(f"sim.r_factors[{k}]", "empty rectangle")
            if not (c.factor > 0 and math.isfinite(c.factor)):
                raise ConfigError(f"sim.r_factors[{k}]", "factor must be positive")
        for a in range(len(self.cells)):
            for b in range(a + 1, len(self.cells)):
                p, q = self.cells[a], self.cells[b]
                if p.soc_lo < q.soc_hi and q.soc_lo < p.soc_hi and p.i_lo < q.i_hi and q.i_lo < p.i_hi:
                    raise ConfigError("sim.r_factors", f"cells {a} and {b} overlap")

    @property
    def soc_top(self) -> float:
        return max((c.soc_hi for c in self.cells), default=math.inf)

    @property
    def i_top(self) -> float:
        return max((c.i_hi for c in self.cells), default=math.inf)

    def factor(self, soc: float, i_charge: float) -> float:
        soc_top, i_top = self.soc_top, self.i_top
        for c in self.cells:
            in_soc = c.soc_lo <= soc < c.soc_hi or (c.soc_hi == soc_top and soc == soc_top)
            in_i = c.i_lo <= i_charge < c.i_hi or (c.i_hi == i_top and i_charge == i_top)
            if in_soc and in_i:
                return c.factor
        return 1.0


@dataclass(frozen=True)
class SimParams:
    """Physical constants of the pack and integration settings.

    Defaults are the calibrated parameterization: a 50 Ah pack whose slow
    charge (20 A) still heats it by about 10 K over ambient, so that at very
    high ambient temperature the approval logic trips and cannot re-arm.
    """

    b_size: float = 50.0  # Ah
    mass: float = 100.0  # kg
    c_cell: float = 900.0  # J/(kg K)
    r_internal: float = 0.25  # ohm
    surface_area: float = 1.5  # m^2
    h_transfer: float = 6.5  # W/(m^2 K)
    r_a: float = 0.01  # ohm
    ocv0: float = 21.6  # V
    ocv_slope: float = 4.8  # V per unit SoC
    soc_init: float = 0.0
    t_bat_init: float = 20.0  # degC
    dt: float = 1.0  # s
    t_sim_max: float = 32400.0  # s
    r_factors: RFactorTable = field(default_factory=RFactorTable)

    def __post_init__(self):
        for name in ("b_size", "mass", "c_cell", "r_internal", "surface_area", "h_transfer", "r_a", "ocv0", "ocv_slope"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"sim.{name}", f"must be a positive finite number, got {v}")
        if not 0.0 <= self.soc_init < 0.95:
            raise ConfigError("sim.soc_init", "must lie in [0, 0.95)")
        if not math.isfinite(self.t_bat_init):
            raise ConfigError("sim.t_bat_init", "must be finite")
        if not (self.dt > 0 and self.t_sim_max > 0):
            raise ConfigError("sim.dt", "dt and t_sim_max must be positive")
        if not self.dt < self.thermal_time_constant:
            raise ConfigError("sim.dt", f"explicit Euler needs dt < m*c/(A*h) = {self.thermal_time_constant:.1f} s")

    @property
    def heat_capacity(self) -> float:
        return self.mass * self.c_cell

    @property
    def heat_transfer(self) -> float:
        return self.surface_area * self.h_transfer

    @property
    def thermal_time_constant(self) -> float:
        return self.heat_capacity / self.heat_transfer


@dataclass(frozen=True)
class ControlLimits:
    soc_full: float = 0.95
    soc_rearm: float = 0.93
    t_bat_max_approve: float = 43.5
    t_bat_rearm: float = 35.0
    t_bat_min_approve: float = -10.0
    t_bat_min_rearm: float = -8.0
    u_bat_max_approve: float = 29.0
    u_bat_rearm: float = 28.5
    heatup_temp: float = 5.0
    fast_soc_lo: float = 0.05
    fast_soc_hi: float = 0.85
    fast_temp_lo: float = 5.0
    fast_temp_hi: float = 40.0
    i_heatup: float = 30.0
    i_slow: float = 20.0
    i_rest: float = 0.0

    def __post_init__(self):
        if not self.soc_rearm < self.soc_full:
            raise ConfigError("limits.soc_rearm", "must be below limits.soc_full")
        if not self.t_bat_rearm < self.t_bat_max_approve:
            raise ConfigError("limits.t_bat_rearm", "must be below limits.t_bat_max_approve")
        if not self.u_bat_rearm < self.u_bat_max_approve:
            raise ConfigError("limits.u_bat_rearm", "must be below limits.u_bat_max_approve")
        if not self.t_bat_min_approve < self.t_bat_min_rearm:
            raise ConfigError("limits.t_bat_min_rearm", "must be above limits.t_bat_min_approve")
        if not self.fast_soc_lo < self.fast_soc_hi:
            raise ConfigError("limits.fast_soc_lo", "must be below limits.fast_soc_hi")
        if not self.fast_temp_lo < self.fast_temp_hi:
            raise ConfigError("limits.fast_temp_lo", "must be below limits.fast_temp_hi")
        for name in ("i_heatup", "i_slow", "i_rest"):
            if getattr(self, name) < 0:
                raise ConfigError(f"limits.{name}", "currents must be non-negative")


@dataclass
class SimState:
    t: float = 0.0
    soc: float = 0.0
    t_bat: float = 20.0
    u_bat: float = 0.0
    control: Control = Control.CHARGING
    i_demand: float = 0.0
    i_charge: float = 0.0


@dataclass(frozen=True)
class TraceRow:
    t: float
    soc: float
    t_bat: float
    u_bat: float
    control: Control
    i_charge: float


@dataclass(frozen=True)
class SimOutcome:
    charging_time_h: float
    timed_out: bool
    t_bat_peak: float
    kappa_peak: float
    steps: int
    trace: Optional[tuple[TraceRow, ...]] = None


# -- component steps ---------------------------------------------------------


def soc_step(soc: float, i_charge: float, dt: float, b_size: float) -> float:
    """Coulomb counting over one step; capacity in Ah, current in A."""
    return min(max(soc + i_charge * dt / (b_size * 3600.0), 0.0), 1.0)


def r_effective(soc: float, i_charge: float, p: SimParams) -> float:
    return p.r_internal * p.r_factors.factor(soc, i_charge)


def temp_step(t_bat: float, i_charge: float, t_amb: float, p: SimParams, dt: float, r: Optional[float] = None) -> float:
    """Forward-Euler step of m*c*dT/dt = R*I^2 + A*h*(T_amb - T).

    ``r`` defaults to the bare internal resistance; the simulator passes the
    factor-corrected value.
    """
    if r is None:
        r = p.r_internal
    return t_bat + dt * (r * i_charge * i_charge + p.heat_transfer * (t_amb - t_bat)) / p.heat_capacity


def voltage(soc: float, i_charge: float, p: SimParams) -> float:
    return p.r_a * i_charge + p.ocv_slope * soc + p.ocv0


def approval_step(prev: Control, soc: float, t_bat: float, u_bat: float, lim: ControlLimits) -> Control:
    if soc >= lim.soc_full or prev is Control.DISCHARGING:
        return Control.DISCHARGING
    if prev is Control.RESTING:
        rearmed = t_bat <= lim.t_bat_rearm and u_bat <= lim.u_bat_rearm and t_bat >= lim.t_bat_min_rearm
        return Control.CHARGING if rearmed else Control.RESTING
    if t_bat > lim.t_bat_max_approve or u_bat > lim.u_bat_max_approve or t_bat < lim.t_bat_min_approve:
        return Control.RESTING
    return Control.CHARGING


def management_step(soc: float, t_bat: float, control: Control, i_max: float, lim: ControlLimits) -> float:
    """Requested current; precedence Rest > Heat Up > Fast > Slow."""
    if control is not Control.CHARGING:
        return lim.i_rest
    if t_bat < lim.heatup_temp:
        return lim.i_heatup
    if lim.fast_soc_lo <= soc <= lim.fast_soc_hi and lim.fast_temp_lo <= t_bat <= lim.fast_temp_hi:
        return i_max
    return lim.i_slow


def station_step(i_demand: float, i_max: float) -> float:
    return min(i_demand, i_max)


# -- full run ----------------------------------------------------------------

Monitor = Callable[[SimState], float]


def simulate(
    t_amb: float,
    i_max: float,
    p: SimParams = SimParams(),
    lim: ControlLimits = ControlLimits(),
    monitor: Optional[Monitor] = None,
    trace_stride: Optional[int] = None,
    crit: CriticalitySpec = CriticalitySpec(),
) -> SimOutcome:
    """Simulate one charging process from ``p.soc_init`` until full or ``p.t_sim_max``.

    ``monitor`` is called on the initial state and after every step; the
    outcome carries its running maximum. Without a monitor the combined
    charging-time / temperature criticality of ``crit`` is used.
    """
    if monitor is None:
        monitor = criticality_monitor(crit)
    if trace_stride is not None and trace_stride < 1:
        raise ValueError("trace_stride must be >= 1")

    st = SimState(t=0.0, soc=p.soc_init, t_bat=p.t_bat_init, control=Control.CHARGING)
    st.u_bat = voltage(st.soc, 0.0, p)
    rows: list[TraceRow] = []
    kappa_peak = monitor(st)
    t_peak = st.t_bat
    k = 0
    charging_time = None

    def record():
        rows.append(TraceRow(st.t, st.soc, st.t_bat, st.u_bat, st.control, st.i_charge))

    if trace_stride is not None:
        record()
    while st.t < p.t_sim_max:
        st.control = approval_step(st.control, st.soc, st.t_bat, st.u_bat, lim)
        if st.control is Control.DISCHARGING:
            charging_time = st.t
            break
        st.i_demand = management_step(st.soc, st.t_bat, st.control, i_max, lim)
        st.i_charge = station_step(st.i_demand, i_max)
        st.u_bat = voltage(st.soc, st.i_charge, p)
        st.soc = soc_step(st.soc, st.i_charge, p.dt, p.b_size)
        r = r_effective(st.soc, st.i_charge, p)
        st.t_bat = temp_step(st.t_bat, st.i_charge, t_amb, p, p.dt, r)
        k += 1
        st.t = k * p.dt
        if not (math.isfinite(st.t_bat) and math.isfinite(st.u_bat)):
            raise SimulationError(k, f"non-finite state (t_bat={st.t_bat}, u_bat={st.u_bat}); check SimParams")
        kappa_peak = max(kappa_peak, monitor(st))
        t_peak = max(t_peak, st.t_bat)
        if trace_stride is not None and k % trace_stride == 0:
            record()
    else:
        # loop ran out of time; a pack that became full on the last step still counts
        if st.soc >= lim.soc_full:
            charging_time = st.t

    timed_out = charging_time is None
    if timed_out:
        charging_time = p.t_sim_max
    return SimOutcome(
        charging_time_h=charging_time / 3600.0,
        timed_out=timed_out,
        t_bat_peak=t_peak,
        kappa_peak=kappa_peak,
        steps=k,
        trace=tuple(rows) if trace_stride is not None else None,
    )


TRACE_HEADER = ("t_s", "soc", "t_bat_c", "u_bat_v", "control", "i_charge_a")


def write_trace_csv(rows: Sequence[TraceRow], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for r in rows:
            w.writerow([f"{r.t:.6f}", f"{r.soc:.6f}", f"{r.t_bat:.6f}", f"{r.u_bat:.6f}", r.control.label, f"{r.i_charge:.6f}"])


def params_as_dict(obj) -> dict:
    """Flat field dict of a SimParams/ControlLimits value (r_factors expanded to lists)."""
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, RFactorTable):
            v = [[c.soc_lo, c.soc_hi, c.i_lo, c.i_hi, c.factor] for c in v.cells]
        out[f.name] = v
    return out
