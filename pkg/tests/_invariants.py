"""Round-by-round HOO checker shared by the unit and acceptance tests."""

import math

import numpy as np

from bms_rare.search import Budget, EvalRecord, HooParams, HooSearch, hoo_u_value


def _check_tree(s: HooSearch) -> None:
    n = len(s.nodes)
    vis, u, b, child = s.visits[:n], s.u[:n], s.b[:n], s.child[:n]
    assert np.all(b <= u), "B exceeds U"
    internal = child[:, 0] >= 0
    c0, c1 = child[internal, 0], child[internal, 1]
    # every internal node was played exactly once as a leaf, the round it was split
    assert np.array_equal(vis[internal], vis[c0] + vis[c1] + 1), "T-sum broken"
    assert np.array_equal(b[internal], np.minimum(u[internal], np.maximum(b[c0], b[c1]))), "B recursion broken"
    assert np.array_equal(b[~internal], u[~internal])
    assert vis[0] == s.rounds


def drive_hoo(p: HooParams, objective, n: int, c_kappa: float = 0.8, check_every: int = 1):
    """Run HOO through the public select/update API, checking invariants every ``check_every`` rounds.

    Draws from the generator in the same order as ``hoo_run``, so the records must match it.
    """
    s = HooSearch(p, 2, capacity=2 * n + 1)
    budget = Budget(n)
    records = []
    for r in range(n):
        path = s.select()
        assert path[0] == 0
        for parent, nxt in zip(path, path[1:]):
            a, c = s.child[parent]
            assert nxt in (a, c)
            assert s.b[nxt] == max(s.b[a], s.b[c]), "path left the argmax-B child"
        assert s.child[path[-1], 0] < 0, "path does not end at a leaf"
        x = s.sample(path[-1])
        k = objective(x)
        leaf = s.nodes[path[-1]]
        records.append(EvalRecord(budget.spend(), x, k, k >= c_kappa, leaf.key))
        s.update(path, k)
        if (r + 1) % check_every == 0 or r == n - 1:
            _check_tree(s)
            for node_id in path:
                nd = s.nodes[node_id]
                mean = s.rsum[node_id] / s.visits[node_id]
                expected = hoo_u_value(int(s.visits[node_id]), mean, nd.h, s.rounds, p)
                assert math.isclose(s.u[node_id], expected, rel_tol=1e-12, abs_tol=1e-12)
    return records, s
