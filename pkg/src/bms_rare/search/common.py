from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from bms_rare.errors import ConfigError

ObjectiveFn = Callable[[Sequence[float]], float]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for ``(seed, stream)``; streams are independent SeedSequence children."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))))


class BudgetExhausted(RuntimeError):
    pass


@dataclass
class Budget:
    n_max: int = 4000
    n_used: int = 0

    def __post_init__(self):
        if self.n_max < 0:
            raise ConfigError("experiment.budget", "must be non-negative")

    @property
    def remaining(self) -> int:
        return self.n_max - self.n_used

    def spend(self) -> int:
        """Charge one evaluation and return its 1-based index."""
        if self.n_used >= self.n_max:
            raise BudgetExhausted(f"budget of {self.n_max} evaluations used up")
        self.n_used += 1
        return self.n_used


@dataclass(frozen=True)
class EvalRecord:
    index: int
    point: tuple[float, ...]
    kappa: float
    critical: bool
    node: Optional[tuple[int, int]] = None
    instance_id: Optional[int] = None


@dataclass
class SearchResult:
    algorithm: str
    params: dict
    records: list[EvalRecord] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def critical_count(self) -> int:
        return sum(r.critical for r in self.records)

    def __len__(self) -> int:
        return len(self.records)


def _check_rho(name: str, rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ConfigError(name, f"must lie in (0, 1), got {rho}")


def _check_pos(name: str, v: float) -> None:
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(name, f"must be positive, got {v}")


@dataclass(frozen=True)
class HooParams:
    nu1: float = 1.0
    rho: float = 0.3
    seed: int = 0

    def __post_init__(self):
        _check_pos("hoo.nu1", self.nu1)
        _check_rho("hoo.rho", self.rho)


@dataclass(frozen=True)
class PooParams:
    nu_max: float = 1.0
    rho_max: float = 0.9
    seed: int = 0

    def __post_init__(self):
        _check_pos("poo.nu_max", self.nu_max)
        _check_rho("poo.rho_max", self.rho_max)


@dataclass(frozen=True)
class DooParams:
    nu1: float = 1.0
    rho: float = 0.3

    def __post_init__(self):
        _check_pos("doo.nu1", self.nu1)
        _check_rho("doo.rho", self.rho)

    def delta(self, h: int) -> float:
        return self.nu1 * self.rho ** h


@dataclass(frozen=True)
class SooParams:
    epsilon: float = 0.6

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError("soo.epsilon", f"must lie in (0, 1], got {self.epsilon}")

    def h_max(self, t: int) -> int:
        return math.floor(t ** self.epsilon)
