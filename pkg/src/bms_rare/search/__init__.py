"""Budgeted search strategies over the objective contract ``f(unit_point) -> kappa``."""

from bms_rare.search.common import (Budget, DooParams, EvalRecord, HooParams, PooParams,
                                    SearchResult, SooParams, make_rng)
from bms_rare.search.doo import doo_b_value, doo_run
from bms_rare.search.hoo import HooSearch, hoo_b_value, hoo_run, hoo_u_value
from bms_rare.search.mc import mc_run
from bms_rare.search.poo import poo_instance_count, poo_run, poo_schedule
from bms_rare.search.soo import soo_run

__all__ = [
    "Budget", "DooParams", "EvalRecord", "HooParams", "HooSearch", "PooParams", "SearchResult",
    "SooParams", "doo_b_value", "doo_run", "hoo_b_value", "hoo_run", "hoo_u_value", "make_rng",
    "mc_run", "poo_instance_count", "poo_run", "poo_schedule", "soo_run",
]
