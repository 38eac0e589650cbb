"""Experiment configuration: one flat TOML file of ``section.key = value`` lines."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from bms_rare.criticality import CriticalitySpec, Dimension, ParamSpace
from bms_rare.errors import ConfigError
from bms_rare.model import ControlLimits, RFactorCell, RFactorTable, SimParams
from bms_rare.search.common import DooParams, HooParams, PooParams, SooParams

ALGORITHMS = ("mc", "hoo", "poo", "doo", "soo")
TEMPLATE_PATH = Path(__file__).with_name("default.toml")


@dataclass(frozen=True)
class CompareSettings:
    hoo_rhos: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
    hoo_seed: int = 1
    doo_rho: float = 0.3
    soo_epsilon: float = 0.6
    mc_seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    poo_rho_max: tuple[float, ...] = ()
    algorithms: tuple[str, ...] = ("mc", "hoo", "doo", "soo")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "doo"
    budget: int = 4000
    seeds: tuple[int, ...] = (1,)
    output_dir: Path = Path("results")
    trace_stride: Optional[int] = None
    hoo: HooParams = HooParams()
    poo: PooParams = PooParams()
    doo: DooParams = DooParams()
    soo: SooParams = SooParams()
    sim: SimParams = SimParams()
    limits: ControlLimits = ControlLimits()
    space: ParamSpace = ParamSpace()
    crit: CriticalitySpec = CriticalitySpec()
    grid_resolution: int = 101
    grid_workers: int = 1
    compare: CompareSettings = CompareSettings()

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("experiment.algorithm", f"must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.budget < 1:
            raise ConfigError("experiment.budget", "must be >= 1")
        if not self.seeds:
            raise ConfigError("experiment.seeds", "at least one seed required")
        if self.trace_stride is not None and self.trace_stride < 1:
            raise ConfigError("experiment.trace_stride", "must be >= 1")
        if self.grid_resolution < 2:
            raise ConfigError("grid.resolution", "must be >= 2")
        if self.grid_workers < 1:
            raise ConfigError("grid.workers", "must be >= 1")
        for a in self.compare.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("compare.algorithms", f"unknown algorithm {a!r}")

    def hyperparameters(self) -> dict:
        return {
            "mc": {},
            "hoo": {"nu1": self.hoo.nu1, "rho": self.hoo.rho},
            "poo": {"nu_max": self.poo.nu_max, "rho_max": self.poo.rho_max},
            "doo": {"nu1": self.doo.nu1, "rho": self.doo.rho},
            "soo": {"epsilon": self.soo.epsilon},
        }[self.algorithm]


# -- parsing -----------------------------------------------------------------

_SIMPLE = {
    "sim": SimParams,
    "limits": ControlLimits,
    "crit": CriticalitySpec,
    "hoo": HooParams,
    "poo": PooParams,
    "doo": DooParams,
    "soo": SooParams,
    "compare": CompareSettings,
}


def _coerce(section: str, key: str, value: Any, target: Any) -> Any:
    name = f"{section}.{key}"
    if isinstance(target, bool):
        if not isinstance(value, bool):
            raise ConfigError(name, f"expected a boolean, got {value!r}")
        return value
    if isinstance(target, int) and not isinstance(target, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if isinstance(target, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(target, tuple):
        if not isinstance(value, list):
            raise ConfigError(name, f"expected a list, got {value!r}")
        return tuple(value)
    if isinstance(target, str):
        if not isinstance(value, str):
            raise ConfigError(name, f"expected a string, got {value!r}")
        return value
    return value


def _build(section: str, cls, table: dict, base):
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in table.items():
        if key == "r_factors" and cls is SimParams:
            kwargs[key] = _parse_r_factors(value)
            continue
        if key not in known:
            raise ConfigError(f"{section}.{key}", "unknown key")
        kwargs[key] = _coerce(section, key, value, getattr(base, key))
    try:
        return replace(base, **kwargs)
    except TypeError as exc:
        raise ConfigError(section, str(exc)) from exc


def _parse_r_factors(value) -> RFactorTable:
    if not isinstance(value, list):
        raise ConfigError("sim.r_factors", "expected a list of [soc_lo, soc_hi, i_lo, i_hi, factor]")
    cells = []
    for k, row in enumerate(value):
        if not (isinstance(row, list) and len(row) == 5):
            raise ConfigError(f"sim.r_factors[{k}]", "expected [soc_lo, soc_hi, i_lo, i_hi, factor]")
        soc_lo, soc_hi, i_lo, i_hi, factor = (float(v) for v in row)
        cells.append(RFactorCell(soc_lo, soc_hi, factor, i_lo, i_hi))
    return RFactorTable(tuple(cells))


def _parse_space(table: dict, base: ParamSpace) -> ParamSpace:
    """Listed axes replace the matching axes of ``base``; the others are kept."""
    dims = {d.name: d for d in base.dims}
    units = {"t_amb": "degC", "i_max": "A"}
    for name, bounds in table.items():
        if not (isinstance(bounds, list) and len(bounds) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bounds)):
            raise ConfigError(f"space.{name}", "expected [lower, upper]")
        dims[name] = Dimension(name, float(bounds[0]), float(bounds[1]), units.get(name, ""))
    order = {"t_amb": 0, "i_max": 1}
    return ParamSpace(tuple(sorted(dims.values(), key=lambda d: order.get(d.name, 99))))


def config_from_dict(data: dict, base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    cfg = base if base is not None else ExperimentConfig()
    updates: dict[str, Any] = {}
    for section, table in data.items():
        if not isinstance(table, dict):
            raise ConfigError(section, "expected section.key entries")
        if section == "experiment":
            for key, value in table.items():
                if key == "algorithm":
                    updates["algorithm"] = _coerce(section, key, value, "")
                elif key == "budget":
                    updates["budget"] = _coerce(section, key, value, 0)
                elif key == "seeds":
                    seeds = _coerce(section, key, value, ())
                    if any(isinstance(s, bool) or not isinstance(s, int) for s in seeds):
                        raise ConfigError("experiment.seeds", "seeds must be integers")
                    updates["seeds"] = seeds
                elif key == "output_dir":
                    updates["output_dir"] = Path(_coerce(section, key, value, ""))
                elif key == "trace_stride":
                    updates["trace_stride"] = _coerce(section, key, value, 0)
                else:
                    raise ConfigError(f"experiment.{key}", "unknown key")
        elif section == "grid":
            for key, value in table.items():
                if key not in ("resolution", "workers"):
                    raise ConfigError(f"grid.{key}", "unknown key")
                updates[f"grid_{key}"] = _coerce(section, key, value, 0)
        elif section == "space":
            updates["space"] = _parse_space(table, updates.get("space", cfg.space))
        elif section in _SIMPLE:
            base_obj = updates.get(section, getattr(cfg, section))
            updates[section] = _build(section, _SIMPLE[section], table, base_obj)
        else:
            raise ConfigError(section, "unknown section")
    return replace(cfg, **updates)


def parse_override(item: str) -> dict:
    """``section.key=value`` (value in TOML syntax; bare words are taken as strings)."""
    if "=" not in item:
        raise ConfigError(item, "override must look like section.key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key.count(".") != 1:
        raise ConfigError(key, "override key must be section.key")
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    section, name = key.split(".")
    return {section: {name: value}}


def load_config(path: Optional[Path] = None, overrides: tuple[str, ...] = ()) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"not valid TOML: {exc}") from exc
        cfg = config_from_dict(data, cfg)
    for item in overrides:
        cfg = config_from_dict(parse_override(item), cfg)
    return cfg


# -- writing -----------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, Path):
        return f'"{v.as_posix()}"'
    if isinstance(v, str):
        return f'"{v}"'
    return str(v)


def dump_config(cfg: ExperimentConfig) -> str:
    """Resolved configuration in the same flat format :func:`load_config` reads."""
    lines = [
        f"experiment.algorithm = {_fmt(cfg.algorithm)}",
        f"experiment.budget = {cfg.budget}",
        f"experiment.seeds = {_fmt(list(cfg.seeds))}",
        f"experiment.output_dir = {_fmt(cfg.output_dir)}",
    ]
    if cfg.trace_stride is not None:
        lines.append(f"experiment.trace_stride = {cfg.trace_stride}")
    for section in ("hoo", "poo", "doo", "soo", "sim", "limits", "crit", "compare"):
        obj = getattr(cfg, section)
        for f in fields(obj):
            v = getattr(obj, f.name)
            if isinstance(v, RFactorTable):
                v = [[c.soc_lo, c.soc_hi, c.i_lo, c.i_hi, c.factor] for c in v.cells]
            lines.append(f"{section}.{f.name} = {_fmt(v)}")
    for d in cfg.space.dims:
        lines.append(f"space.{d.name} = {_fmt([d.lower, d.upper])}")
    lines.append(f"grid.resolution = {cfg.grid_resolution}")
    lines.append(f"grid.workers = {cfg.grid_workers}")
    return "\n".join(lines) + "\n"


def template() -> str:
    return TEMPLATE_PATH.read_text()
