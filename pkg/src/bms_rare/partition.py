"""Hierarchical binary partition of the unit hypercube.

Node (h, i) has children (h+1, 2i-1) and (h+1, 2i); a split halves the
longest side of the cell (lowest dimension index on ties) and the first child
takes the lower half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Cell:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if not (0.0 <= a < b <= 1.0):
                raise ValueError(f"invalid cell bounds {self.lo} {self.hi}")

    @classmethod
    def unit(cls, d: int = 2) -> "Cell":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def diameter(self) -> float:
        return math.sqrt(sum(s * s for s in self.sides))

    def contains(self, x: Sequence[float]) -> bool:
        # half-open, closed where the cell touches the upper face of the cube
        for a, b, v in zip(self.lo, self.hi, x):
            if not (a <= v < b or (b == 1.0 and v == 1.0)):
                return False
        return True


def center(cell: Cell) -> tuple[float, ...]:
    return tuple((a + b) / 2.0 for a, b in zip(cell.lo, cell.hi))


def sample_uniform(cell: Cell, rng: np.random.Generator) -> tuple[float, ...]:
    lo, hi = np.array(cell.lo), np.array(cell.hi)
    x = lo + rng.random(cell.ndim) * (hi - lo)
    # guard the open upper face against rounding
    x = np.minimum(x, np.nextafter(hi, lo))
    return tuple(float(v) for v in x)


class PartitionNode:
    """One cell of the partition plus the statistics the search algorithms keep on it."""

    __slots__ = ("h", "i", "cell", "parent", "children", "visits", "reward_sum",
                 "value", "point", "u_value", "b_value", "uid")

    def __init__(self, h: int, i: int, cell: Cell, parent: Optional["PartitionNode"] = None):
        self.h = h
        self.i = i
        self.cell = cell
        self.parent = parent
        self.children: tuple["PartitionNode", ...] = ()
        self.visits = 0
        self.reward_sum = 0.0
        self.value: Optional[float] = None
        self.point: Optional[tuple[float, ...]] = None
        self.u_value: Optional[float] = None
        self.b_value: Optional[float] = None
        self.uid = 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.h, self.i)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def mean(self) -> float:
        return self.reward_sum / self.visits if self.visits else math.nan

    def __repr__(self) -> str:
        return f"PartitionNode(h={self.h}, i={self.i}, lo={self.cell.lo}, hi={self.cell.hi})"


def root(d: int = 2) -> PartitionNode:
    return PartitionNode(0, 1, Cell.unit(d))


def split(node: PartitionNode) -> tuple[PartitionNode, PartitionNode]:
    if node.children:
        raise RuntimeError(f"node {node.key} is already split")
    sides = node.cell.sides
    k = max(range(len(sides)), key=lambda j: (sides[j], -j))
    lo, hi = node.cell.lo, node.cell.hi
    mid = (lo[k] + hi[k]) / 2.0
    if not lo[k] < mid < hi[k]:
        raise RuntimeError(f"node {node.key} is too small to split in floating point")
    lower = Cell(lo, hi[:k] + (mid,) + hi[k + 1:])
    upper = Cell(lo[:k] + (mid,) + lo[k + 1:], hi)
    a = PartitionNode(node.h + 1, 2 * node.i - 1, lower, node)
    b = PartitionNode(node.h + 1, 2 * node.i, upper, node)
    node.children = (a, b)
    return a, b


def leaves(tree: PartitionNode) -> Iterator[PartitionNode]:
    """Depth-first, lower child first."""
    stack = [tree]
    while stack:
        n = stack.pop()
        if n.children:
            stack.extend(reversed(n.children))
        else:
            yield n


def iter_nodes(tree: PartitionNode) -> Iterator[PartitionNode]:
    stack = [tree]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def locate(tree: PartitionNode, x: Sequence[float]) -> PartitionNode:
    """Leaf whose cell contains ``x``."""
    n = tree
    while n.children:
        a, b = n.children
        n = a if a.cell.contains(x) else b
    return n


def parent_key(h: int, i: int) -> tuple[int, int]:
    return (h - 1, (i + 1) // 2)


def dump(tree: PartitionNode) -> list[str]:
    """Debug lines ``h i lo0 lo1 hi0 hi1 T mean value`` (2-D trees)."""
    out = []
    for n in iter_nodes(tree):
        mean = n.mean
        value = "nan" if n.value is None else f"{n.value:.6f}"
        out.append(" ".join([
            str(n.h), str(n.i),
            *(f"{v:.6f}" for v in n.cell.lo), *(f"{v:.6f}" for v in n.cell.hi),
            str(n.visits), "nan" if math.isnan(mean) else f"{mean:.6f}", value,
        ]))
    return out
