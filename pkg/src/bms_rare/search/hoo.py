"""Hierarchical optimistic optimization over the binary partition tree.

Per round: descend from the root along the child with the larger B-value
(uniform random tie-break), sample a point uniformly in the reached leaf,
evaluate it, split the leaf, add the reward to every node on the path and
recompute U- and B-values of the whole tree.
"""

from __future__ import annotations

import math
from typing import Optional

import numba
import numpy as np

from bms_rare import partition
from bms_rare.partition import PartitionNode
from bms_rare.search.common import (Budget, EvalRecord, HooParams, ObjectiveFn, SearchResult,
                                    make_rng)


def hoo_u_value(visits: int, mean: float, h: int, n_total: int, p: HooParams) -> float:
    if visits == 0:
        return math.inf
    return mean + math.sqrt(2.0 * math.log(n_total) / visits) + p.nu1 * p.rho ** h


def hoo_b_value(u_value: float, child_b: tuple[float, ...] = ()) -> float:
    """B = min(U, max child B); a leaf's missing children count as +inf."""
    if not child_b:
        return u_value
    return min(u_value, max(child_b))


@numba.njit(cache=True)
def _refresh(n, visits, rsum, smooth, child, n_total, u, b):
    # children are always created after their parent, so reverse id order is bottom-up
    logn = math.log(n_total)
    for k in range(n - 1, -1, -1):
        if visits[k] == 0:
            u[k] = math.inf
        else:
            u[k] = rsum[k] / visits[k] + math.sqrt(2.0 * logn / visits[k]) + smooth[k]
        c0 = child[k, 0]
        if c0 < 0:
            b[k] = u[k]
        else:
            b[k] = min(u[k], max(b[c0], b[child[k, 1]]))


class HooSearch:
    """One HOO instance; :meth:`select` and :meth:`update` are exposed so POO can interleave lookups."""

    def __init__(self, params: HooParams, d: int = 2, rng: Optional[np.random.Generator] = None,
                 capacity: int = 1024):
        self.params = params
        self.rng = rng if rng is not None else make_rng(params.seed)
        self.root = partition.root(d)
        self.nodes: list[PartitionNode] = []
        self.visits = np.zeros(capacity, dtype=np.int64)
        self.rsum = np.zeros(capacity)
        self.smooth = np.zeros(capacity)
        self.child = np.full((capacity, 2), -1, dtype=np.int64)
        self.u = np.full(capacity, math.inf)
        self.b = np.full(capacity, math.inf)
        self.rounds = 0
        self._add(self.root)

    def _add(self, node: PartitionNode) -> int:
        k = len(self.nodes)
        if k == len(self.visits):
            self._grow()
        node.uid = k
        self.nodes.append(node)
        self.smooth[k] = self.params.nu1 * self.params.rho ** node.h
        return k

    def _grow(self):
        cap = 2 * len(self.visits)
        self.visits = np.concatenate([self.visits, np.zeros(cap - len(self.visits), dtype=np.int64)])
        self.rsum = np.concatenate([self.rsum, np.zeros(cap - len(self.rsum))])
        self.smooth = np.concatenate([self.smooth, np.zeros(cap - len(self.smooth))])
        self.child = np.concatenate([self.child, np.full((cap - len(self.child), 2), -1, dtype=np.int64)])
        self.u = np.concatenate([self.u, np.full(cap - len(self.u), math.inf)])
        self.b = np.concatenate([self.b, np.full(cap - len(self.b), math.inf)])

    def select(self) -> list[int]:
        """Root-to-leaf path of node ids following the larger child B-value."""
        k = 0
        path = [0]
        child, b = self.child, self.b
        while child[k, 0] >= 0:
            c0, c1 = child[k, 0], child[k, 1]
            b0, b1 = b[c0], b[c1]
            if b0 > b1:
                k = c0
            elif b1 > b0:
                k = c1
            else:
                k = c0 if self.rng.integers(2) == 0 else c1
            path.append(int(k))
        return path

    def sample(self, leaf_id: int) -> tuple[float, ...]:
        return partition.sample_uniform(self.nodes[leaf_id].cell, self.rng)

    def update(self, path: list[int], reward: float) -> None:
        leaf = self.nodes[path[-1]]
        a, c = partition.split(leaf)
        ia, ic = self._add(a), self._add(c)
        self.child[path[-1]] = (ia, ic)
        for k in path:
            self.visits[k] += 1
            self.rsum[k] += reward
        self.rounds += 1
        _refresh(len(self.nodes), self.visits, self.rsum, self.smooth, self.child, self.rounds, self.u, self.b)

    def sync_nodes(self) -> None:
        """Copy the array statistics onto the PartitionNode objects (for dumps and inspection)."""
        for k, n in enumerate(self.nodes):
            n.visits = int(self.visits[k])
            n.reward_sum = float(self.rsum[k])
            n.u_value = float(self.u[k])
            n.b_value = float(self.b[k])


def hoo_run(budget: Budget, p: HooParams, objective: ObjectiveFn, d: int = 2, c_kappa: float = 0.8,
            search: Optional[HooSearch] = None) -> SearchResult:
    s = search if search is not None else HooSearch(p, d, capacity=2 * budget.remaining + 1)
    res = SearchResult("hoo", {"nu1": p.nu1, "rho": p.rho, "seed": p.seed})
    while budget.remaining > 0:
        path = s.select()
        x = s.sample(path[-1])
        k = objective(x)
        leaf = s.nodes[path[-1]]
        res.records.append(EvalRecord(budget.spend(), x, k, k >= c_kappa, leaf.key))
        s.update(path, k)
    res.extras["tree_size"] = len(s.nodes)
    res.extras["search"] = s
    return res
