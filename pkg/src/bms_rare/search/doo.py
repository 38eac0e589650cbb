"""Deterministic optimistic optimization.

Every node is represented by its cell center. Each round the leaf with the
largest ``value + nu1 * rho**h`` is split and both children are evaluated;
ties go to the smaller depth, then the smaller index.
"""

from __future__ import annotations

import heapq

from bms_rare import partition
from bms_rare.partition import PartitionNode
from bms_rare.search.common import Budget, DooParams, EvalRecord, ObjectiveFn, SearchResult


def doo_b_value(value: float, h: int, p: DooParams) -> float:
    return value + p.delta(h)


def _evaluate(node: PartitionNode, budget: Budget, objective: ObjectiveFn, res: SearchResult, c_kappa: float):
    x = partition.center(node.cell)
    k = objective(x)
    node.point, node.value = x, k
    res.records.append(EvalRecord(budget.spend(), x, k, k >= c_kappa, node.key))


def doo_run(budget: Budget, p: DooParams, objective: ObjectiveFn, d: int = 2, c_kappa: float = 0.8) -> SearchResult:
    res = SearchResult("doo", {"nu1": p.nu1, "rho": p.rho})
    tree = partition.root(d)
    res.extras["tree"] = tree
    if budget.remaining == 0:
        return res
    _evaluate(tree, budget, objective, res, c_kappa)
    heap = [(-doo_b_value(tree.value, 0, p), 0, 1, tree)]
    splits = []
    while budget.remaining > 0:
        _, _, _, leaf = heapq.heappop(heap)
        splits.append(leaf.key)
        for child in partition.split(leaf):
            if budget.remaining == 0:
                break
            _evaluate(child, budget, objective, res, c_kappa)
            heapq.heappush(heap, (-doo_b_value(child.value, child.h, p), child.h, child.i, child))
    res.extras["splits"] = splits
    return res
