"""Simultaneous optimistic optimization.

A sweep walks depths 0..min(tree depth, floor(t**epsilon)), both bounds taken
at the start of the sweep, t being the number of splits so far. At each depth
the best leaf (smaller index on ties) is split when its value is at least the
best value split earlier in the same sweep.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict

from bms_rare import partition
from bms_rare.search.common import Budget, EvalRecord, ObjectiveFn, SearchResult, SooParams
from bms_rare.search.doo import _evaluate


def soo_run(budget: Budget, p: SooParams, objective: ObjectiveFn, d: int = 2, c_kappa: float = 0.8) -> SearchResult:
    res = SearchResult("soo", {"epsilon": p.epsilon})
    tree = partition.root(d)
    res.extras["tree"] = tree
    if budget.remaining == 0:
        return res
    _evaluate(tree, budget, objective, res, c_kappa)
    by_depth: dict[int, list] = defaultdict(list)
    by_depth[0].append((-tree.value, 1, tree))
    depth = 0
    t = 0
    splits = []
    capped_sweeps = 0

    while budget.remaining > 0:
        top = min(depth, p.h_max(t))
        if not any(by_depth[h] for h in range(top + 1)):
            # every leaf sits below the cap; let the shallowest one through
            top = min(h for h, q in by_depth.items() if q)
            capped_sweeps += 1
        v_best = -math.inf
        for h in range(top + 1):
            q = by_depth[h]
            if not q or -q[0][0] < v_best:
                continue
            _, _, leaf = heapq.heappop(q)
            v_best = leaf.value
            splits.append(leaf.key)
            t += 1
            for child in partition.split(leaf):
                if budget.remaining == 0:
                    break
                _evaluate(child, budget, objective, res, c_kappa)
                heapq.heappush(by_depth[child.h], (-child.value, child.i, child))
            depth = max(depth, h + 1)
            if budget.remaining == 0:
                break

    res.extras.update(splits=splits, depth=depth, capped_sweeps=capped_sweeps)
    return res
