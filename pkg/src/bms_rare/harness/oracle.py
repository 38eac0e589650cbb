"""Brute-force grid evaluation of the objective and the calibration gates built on it."""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from bms_rare.harness.config import ExperimentConfig
from bms_rare.harness.experiment import make_objective

GRID_HEADER = ("u0", "u1", "t_amb_c", "i_max_a", "kappa", "critical")

# calibration gates
CRITICAL_FRACTION_BAND = (0.003, 0.02)
CRITICAL_REGION_MIN = (25.0, 55.0)  # every critical point has t_amb >= 25 degC and i_max >= 55 A
PLATEAU_BAND = (0.3, 0.45)
# lower-left probe: cold ambient, currents above the range where charging time dominates
PLATEAU_T_AMB = (-5.0, 10.0)
PLATEAU_I_MAX = (20.0, 40.0)


@dataclass
class GridResult:
    resolution: int
    units: np.ndarray  # (n, 2)
    physical: np.ndarray  # (n, 2)
    kappa: np.ndarray  # (n,)
    critical: np.ndarray  # (n,) bool

    @property
    def critical_fraction(self) -> float:
        return float(self.critical.mean())

    def as_matrix(self) -> np.ndarray:
        """kappa[i0, i1] with i0 along t_amb and i1 along i_max."""
        return self.kappa.reshape(self.resolution, self.resolution)


def grid_points(resolution: int) -> np.ndarray:
    ticks = np.arange(resolution) / (resolution - 1)
    u0, u1 = np.meshgrid(ticks, ticks, indexing="ij")
    return np.column_stack([u0.ravel(), u1.ravel()])


def _eval_chunk(args):
    cfg, chunk = args
    return make_objective(cfg).evaluate_many(chunk)


def grid_oracle(resolution: int, cfg: ExperimentConfig, out_dir: Optional[Path] = None,
                workers: int = 1) -> GridResult:
    """Evaluate the objective on a resolution x resolution grid over the unit square.

    Rows of ``grid.csv`` are ordered by (u0, u1) regardless of how the work
    was split between worker processes.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    units = grid_points(resolution)
    if workers > 1:
        chunks = np.array_split(units, workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            kappa = np.concatenate(list(ex.map(_eval_chunk, [(cfg, c) for c in chunks])))
    else:
        kappa = make_objective(cfg).evaluate_many(units)
    phys = cfg.space.lower + units * (cfg.space.upper - cfg.space.lower)
    res = GridResult(resolution, units, phys, kappa, kappa >= cfg.crit.c_kappa)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_grid_csv(res, out_dir / "grid.csv")
    return res


def write_grid_csv(res: GridResult, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GRID_HEADER)
        for (u0, u1), (ta, im), k, c in zip(res.units, res.physical, res.kappa, res.critical):
            w.writerow([f"{u0:.6f}", f"{u1:.6f}", f"{ta:.6f}", f"{im:.6f}", f"{k:.6f}", int(c)])


@dataclass
class Gate:
    name: str
    passed: bool
    detail: str


@dataclass
class CalibrationReport:
    gates: list[Gate]
    grid: GridResult

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)

    def lines(self) -> list[str]:
        return [f"[{'PASS' if g.passed else 'FAIL'}] {g.name}: {g.detail}" for g in self.gates]


def plateau_value(res: GridResult) -> float:
    ta, im = res.physical[:, 0], res.physical[:, 1]
    mask = ((ta >= PLATEAU_T_AMB[0]) & (ta <= PLATEAU_T_AMB[1])
            & (im >= PLATEAU_I_MAX[0]) & (im <= PLATEAU_I_MAX[1]))
    return float(res.kappa[mask].mean())


def calibrate_check(cfg: ExperimentConfig, resolution: int = 101, out_dir: Optional[Path] = None,
                    workers: int = 1) -> CalibrationReport:
    res = grid_oracle(resolution, cfg, out_dir, workers)
    frac = res.critical_fraction
    lo, hi = CRITICAL_FRACTION_BAND
    gates = [Gate("critical fraction", bool(lo <= frac <= hi), f"{frac:.6f} (band [{lo}, {hi}])")]

    crit_pts = res.physical[res.critical]
    if len(crit_pts):
        min_t, min_i = crit_pts[:, 0].min(), crit_pts[:, 1].min()
        ok = bool(min_t >= CRITICAL_REGION_MIN[0] and min_i >= CRITICAL_REGION_MIN[1])
        detail = f"critical cells start at t_amb={min_t:.3f} degC, i_max={min_i:.3f} A"
    else:
        # an empty critical set is trivially confined; gate (a) reports it
        ok, detail = True, "no critical cells"
    detail += f" (need >= {CRITICAL_REGION_MIN[0]} degC and >= {CRITICAL_REGION_MIN[1]} A)"
    gates.append(Gate("upper-right region", ok, detail))

    pv = plateau_value(res)
    gates.append(Gate("lower-left plateau", bool(PLATEAU_BAND[0] <= pv <= PLATEAU_BAND[1]),
                      f"mean kappa {pv:.6f} over t_amb in {list(PLATEAU_T_AMB)}, "
                      f"i_max in {list(PLATEAU_I_MAX)} (band {list(PLATEAU_BAND)})"))
    return CalibrationReport(gates, res)
