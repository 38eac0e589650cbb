"""Experiment runner, grid oracle, calibration gates, comparison suite and CLI."""

from bms_rare.harness.compare import CompareReport, compare_algorithms
from bms_rare.harness.config import ExperimentConfig, load_config
from bms_rare.harness.experiment import Summary, cumulative_curve, run_experiment
from bms_rare.harness.oracle import calibrate_check, grid_oracle

__all__ = [
    "CompareReport", "ExperimentConfig", "Summary", "calibrate_check", "compare_algorithms",
    "cumulative_curve", "grid_oracle", "load_config", "run_experiment",
]
