"""Command line entry point: ``bms-rare <verb> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from bms_rare.errors import ConfigError, SimulationError
from bms_rare.harness.config import ExperimentConfig, load_config, template

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_CALIBRATION = 4
EXIT_ORDERING = 5
EXIT_SIMULATION = 6


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="flat TOML configuration file")
    p.add_argument("--seed", type=int, action="append", help="seed; repeat for several runs")
    p.add_argument("--budget", type=int, help="simulations per run")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config key; repeatable")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bms-rare", description="Rare critical scenario search on a battery charging model.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run one algorithm for every configured seed")
    _common(p)
    p.add_argument("--algorithm", choices=("mc", "hoo", "poo", "doo", "soo"))

    p = sub.add_parser("grid", help="evaluate the objective on a uniform grid")
    _common(p)
    p.add_argument("--resolution", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("calibrate", help="check the calibration gates on the resolution-101 grid")
    _common(p)
    p.add_argument("--resolution", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("compare", help="run the comparison suite and check the count ordering")
    _common(p)

    p = sub.add_parser("trace", help="simulate one (t_amb, i_max) pair and export the state trace")
    _common(p)
    p.add_argument("--t-amb", type=float, required=True, help="ambient temperature, degC")
    p.add_argument("--i-max", type=float, required=True, help="station current limit, A")
    p.add_argument("--stride", type=int, help="trace row every N steps (default: experiment.trace_stride or 60)")

    sub.add_parser("template", help="print the commented configuration template")
    return ap


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config, tuple(args.overrides))
    upd = {}
    if args.seed:
        upd["seeds"] = tuple(args.seed)
    if args.budget is not None:
        upd["budget"] = args.budget
    if args.out is not None:
        upd["output_dir"] = args.out
    if getattr(args, "algorithm", None):
        upd["algorithm"] = args.algorithm
    if getattr(args, "resolution", None) is not None:
        upd["grid_resolution"] = args.resolution
    if getattr(args, "workers", None) is not None:
        upd["grid_workers"] = args.workers
    return replace(cfg, **upd)


def _cmd_run(cfg: ExperimentConfig) -> int:
    from bms_rare.harness.experiment import run_experiment

    s = run_experiment(cfg)
    std = "n/a" if s.std is None else f"{s.std:.2f}"
    print(f"{s.algorithm} {s.hyperparameters} budget {s.budget}")
    for seed, c in zip(s.seeds, s.critical_counts):
        print(f"  seed {seed}: {c} critical")
    print(f"mean {s.mean:.2f} sd {std} ratio {s.critical_ratio:.4f} ({s.wall_time_s:.1f} s)")
    print(f"results in {cfg.output_dir}")
    return EXIT_OK


def _cmd_grid(cfg: ExperimentConfig) -> int:
    from bms_rare.harness.oracle import grid_oracle

    res = grid_oracle(cfg.grid_resolution, cfg, Path(cfg.output_dir), cfg.grid_workers)
    print(f"{res.resolution}x{res.resolution} grid, critical fraction {res.critical_fraction:.6f}")
    print(f"wrote {Path(cfg.output_dir) / 'grid.csv'}")
    return EXIT_OK


def _cmd_calibrate(cfg: ExperimentConfig) -> int:
    from bms_rare.harness.oracle import calibrate_check

    out = Path(cfg.output_dir)
    rep = calibrate_check(cfg, cfg.grid_resolution, out, cfg.grid_workers)
    for line in rep.lines():
        print(line)
    (out / "calibration.json").write_text(json.dumps(
        {"passed": rep.passed, "gates": [{"name": g.name, "passed": g.passed, "detail": g.detail} for g in rep.gates]},
        indent=2) + "\n")
    return EXIT_OK if rep.passed else EXIT_CALIBRATION


def _cmd_compare(cfg: ExperimentConfig) -> int:
    from bms_rare.harness.compare import compare_algorithms

    rep = compare_algorithms(cfg, out_dir=Path(cfg.output_dir))
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.passed else EXIT_ORDERING


def _cmd_trace(cfg: ExperimentConfig, t_amb: float, i_max: float, stride: Optional[int]) -> int:
    from bms_rare.model import simulate, write_trace_csv

    stride = stride or cfg.trace_stride or 60
    if stride < 1:
        raise ConfigError("--stride", "must be >= 1")
    out = simulate(t_amb, i_max, cfg.sim, cfg.limits, trace_stride=stride, crit=cfg.crit)
    d = Path(cfg.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"trace_{t_amb:g}_{i_max:g}.csv"
    write_trace_csv(out.trace, path)
    print(f"charging time {out.charging_time_h:.4f} h{' (timed out)' if out.timed_out else ''}, "
          f"peak t_bat {out.t_bat_peak:.3f} degC, kappa {out.kappa_peak:.6f}")
    print(f"wrote {path}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "template":
        sys.stdout.write(template())
        return EXIT_OK
    try:
        cfg = _resolve(args)
        if args.verb == "run":
            return _cmd_run(cfg)
        if args.verb == "grid":
            return _cmd_grid(cfg)
        if args.verb == "calibrate":
            return _cmd_calibrate(cfg)
        if args.verb == "compare":
            return _cmd_compare(cfg)
        return _cmd_trace(cfg, args.t_amb, args.i_max, args.stride)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
