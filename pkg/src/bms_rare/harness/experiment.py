from __future__ import annotations

import csv
import json
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from bms_rare.criticality import denormalize
from bms_rare.harness.config import ExperimentConfig, dump_config
from bms_rare.objective import Objective
from bms_rare.search import (Budget, DooParams, EvalRecord, HooParams, PooParams, SearchResult,
                             SooParams, doo_run, hoo_run, mc_run, poo_run, soo_run)

RUN_HEADER = ("idx", "u0", "u1", "t_amb_c", "i_max_a", "kappa", "critical", "node_h", "node_i", "instance_id")


def make_objective(cfg: ExperimentConfig) -> Objective:
    return Objective(cfg.sim, cfg.limits, cfg.space, cfg.crit)


def run_algorithm(cfg: ExperimentConfig, seed: int, objective: Optional[Objective] = None,
                  algorithm: Optional[str] = None, params=None, budget: Optional[int] = None) -> SearchResult:
    """One search run. ``params`` overrides the hyperparameters held in ``cfg``."""
    algorithm = algorithm or cfg.algorithm
    obj = objective if objective is not None else make_objective(cfg)
    b = Budget(budget if budget is not None else cfg.budget)
    ck = cfg.crit.c_kappa
    d = cfg.space.ndim
    if algorithm == "mc":
        return mc_run(b, seed, obj, d, ck)
    if algorithm == "hoo":
        p = params or cfg.hoo
        return hoo_run(b, HooParams(p.nu1, p.rho, seed), obj, d, ck)
    if algorithm == "poo":
        p = params or cfg.poo
        return poo_run(b, PooParams(p.nu_max, p.rho_max, seed), obj, d, ck)
    if algorithm == "doo":
        return doo_run(b, params or cfg.doo, obj, d, ck)
    if algorithm == "soo":
        return soo_run(b, params or cfg.soo, obj, d, ck)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def cumulative_curve(records: Sequence[EvalRecord]) -> list[tuple[int, int]]:
    """(n, critical events among the first n evaluations) for n = 1..len(records)."""
    if not records:
        raise ValueError("empty trace")
    out, count = [], 0
    for n, r in enumerate(records, start=1):
        count += bool(r.critical)
        out.append((n, count))
    return out


def _opt(v) -> str:
    return "" if v is None else str(v)


def write_run_csv(records: Sequence[EvalRecord], cfg: ExperimentConfig, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_HEADER)
        for r in records:
            phys = denormalize(r.point, cfg.space)
            h, i = r.node if r.node is not None else (None, None)
            w.writerow([
                r.index, f"{r.point[0]:.6f}", f"{r.point[1]:.6f}", f"{phys[0]:.6f}", f"{phys[1]:.6f}",
                f"{r.kappa:.6f}", int(r.critical), _opt(h), _opt(i), _opt(r.instance_id),
            ])


def write_curve_csv(curve: Sequence[tuple[int, int]], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("n", "critical_count"))
        w.writerows(curve)


def read_run_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class Summary:
    algorithm: str
    hyperparameters: dict
    budget: int
    seeds: list[int]
    critical_counts: list[int]
    evaluations: list[int]
    wall_time_s: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return statistics.fmean(self.critical_counts)

    @property
    def std(self) -> Optional[float]:
        # sample standard deviation (n - 1)
        return statistics.stdev(self.critical_counts) if len(self.critical_counts) > 1 else None

    @property
    def critical_ratio(self) -> float:
        return sum(self.critical_counts) / sum(self.evaluations)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "hyperparameters": self.hyperparameters,
            "budget": self.budget,
            "seeds": self.seeds,
            "runs": [
                {"seed": s, "file": f"run_{s}.csv", "evaluations": n, "critical_count": c}
                for s, n, c in zip(self.seeds, self.evaluations, self.critical_counts)
            ],
            "critical_counts": self.critical_counts,
            "mean": round(self.mean, 6),
            "std": None if self.std is None else round(self.std, 6),
            "critical_ratio": round(self.critical_ratio, 6),
            "wall_time_s": round(self.wall_time_s, 3),
        }


def _diagnostics(res: SearchResult) -> dict:
    keep = ("instances", "rhos", "requests", "hits", "fresh", "best_instance", "best_rho", "depth", "capped_sweeps")
    return {k: v for k, v in res.extras.items() if k in keep}


def run_experiment(cfg: ExperimentConfig, objective: Optional[Objective] = None) -> Summary:
    """Run the configured algorithm once per seed and write all result files under ``cfg.output_dir``.

    Files: ``run_<seed>.csv``, ``curve_<seed>.csv``, ``summary.json`` (derived
    from the run files only), ``diagnostics.json`` (algorithm internals such as
    POO cache hits) and ``config.toml`` (the resolved configuration).
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    obj = objective if objective is not None else make_objective(cfg)
    counts, evals, diag = [], [], {}
    t0 = time.perf_counter()
    for seed in cfg.seeds:
        res = run_algorithm(cfg, seed, obj)
        write_run_csv(res.records, cfg, out / f"run_{seed}.csv")
        if res.records:
            write_curve_csv(cumulative_curve(res.records), out / f"curve_{seed}.csv")
        counts.append(res.critical_count)
        evals.append(len(res.records))
        diag[str(seed)] = _diagnostics(res)
    summary = Summary(cfg.algorithm, cfg.hyperparameters(), cfg.budget, list(cfg.seeds), counts, evals,
                      time.perf_counter() - t0, diag)
    (out / "summary.json").write_text(json.dumps(summary.to_json(), indent=2) + "\n")
    (out / "diagnostics.json").write_text(json.dumps(diag, indent=2) + "\n")
    (out / "config.toml").write_text(dump_config(cfg))
    return summary


def summary_from_csvs(out_dir: Path, seeds: Sequence[int]) -> dict:
    """Recompute the count statistics of summary.json from the run files alone."""
    counts, evals = [], []
    for s in seeds:
        rows = read_run_csv(Path(out_dir) / f"run_{s}.csv")
        counts.append(sum(int(r["critical"]) for r in rows))
        evals.append(len(rows))
    return {
        "critical_counts": counts,
        "mean": round(statistics.fmean(counts), 6),
        "std": round(statistics.stdev(counts), 6) if len(counts) > 1 else None,
        "critical_ratio": round(sum(counts) / sum(evals), 6),
    }
