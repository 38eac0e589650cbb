from __future__ import annotations

from bms_rare.search.common import Budget, EvalRecord, ObjectiveFn, SearchResult, make_rng


def mc_run(budget: Budget, seed: int, objective: ObjectiveFn, d: int = 2, c_kappa: float = 0.8) -> SearchResult:
    """Uniform i.i.d. sampling of the unit cube."""
    rng = make_rng(seed)
    res = SearchResult("mc", {"seed": seed})
    while budget.remaining > 0:
        x = tuple(float(v) for v in rng.random(d))
        k = objective(x)
        res.records.append(EvalRecord(budget.spend(), x, k, k >= c_kappa))
    return res
