"""Parallel optimistic optimization: a family of HOO instances sharing evaluations.

Instances advance round-robin. Before an instance evaluates the leaf it
reached, a cache keyed by node (h, i) is consulted; a hit hands back the
stored (point, kappa) pair without spending budget.
"""

from __future__ import annotations

import math

from bms_rare.search.common import (Budget, EvalRecord, HooParams, ObjectiveFn, PooParams,
                                    SearchResult, make_rng)
from bms_rare.search.hoo import HooSearch


def poo_instance_count(rho_max: float, n: int) -> int:
    """Smallest power of two at or above ceil(D_max/2 * ln(n / ln n)), D_max = ln 2 / ln(1/rho_max)."""
    if n < 3:
        return 1
    d_max = math.log(2.0) / math.log(1.0 / rho_max)
    target = max(1, math.ceil(0.5 * d_max * math.log(n / math.log(n))))
    return 1 << (target - 1).bit_length()


def poo_schedule(p: PooParams, n: int) -> list[HooParams]:
    """Instance j = 1..M runs HOO with nu_max and rho_max ** (M / j)."""
    m = poo_instance_count(p.rho_max, n)
    return [HooParams(nu1=p.nu_max, rho=p.rho_max ** (m / j), seed=p.seed) for j in range(1, m + 1)]


def poo_run(budget: Budget, p: PooParams, objective: ObjectiveFn, d: int = 2, c_kappa: float = 0.8,
            max_requests: int | None = None) -> SearchResult:
    schedule = poo_schedule(p, budget.n_max)
    cap = 2 * budget.remaining + 1
    instances = [HooSearch(hp, d, rng=make_rng(p.seed, j), capacity=cap) for j, hp in enumerate(schedule)]
    cache: dict[tuple[int, int], tuple[tuple[float, ...], float]] = {}
    res = SearchResult("poo", {"nu_max": p.nu_max, "rho_max": p.rho_max, "seed": p.seed})
    reward_sum = [0.0] * len(instances)
    plays = [0] * len(instances)
    requests = hits = 0
    if max_requests is None:
        max_requests = 1000 * max(budget.n_max, 1)

    while budget.remaining > 0 and requests < max_requests:
        for j, inst in enumerate(instances):
            path = inst.select()
            leaf = inst.nodes[path[-1]]
            requests += 1
            got = cache.get(leaf.key)
            if got is not None:
                x, k = got
                hits += 1
            else:
                x = inst.sample(path[-1])
                k = objective(x)
                cache[leaf.key] = (x, k)
                res.records.append(EvalRecord(budget.spend(), x, k, k >= c_kappa, leaf.key, j + 1))
            inst.update(path, k)
            reward_sum[j] += k
            plays[j] += 1
            if budget.remaining == 0:
                break

    means = [s / c if c else -math.inf for s, c in zip(reward_sum, plays)]
    best = max(range(len(instances)), key=lambda j: means[j])
    res.extras.update(
        instances=len(instances),
        rhos=[hp.rho for hp in schedule],
        requests=requests,
        hits=hits,
        fresh=len(res.records),
        best_instance=best + 1,
        best_rho=schedule[best].rho,
        instance_means=means,
        searches=instances,
    )
    return res
