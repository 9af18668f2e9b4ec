"""Strict partial orders over node ids, ordered clusterings and the δ/θ metrics.

``less[u, v]`` is True when ``u`` is older than ``v``.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np


class CycleError(ValueError):
    """Relation is not acyclic; ``cycle`` holds one offending node cycle."""

    def __init__(self, cycle: list[int]):
        self.cycle = cycle
        super().__init__("relation contains a cycle: " + " < ".join(map(str, cycle + cycle[:1])))


class NoComparablePairsError(ValueError):
    pass


class EmptyIntersectionError(ValueError):
    pass


class PartialOrder:
    __slots__ = ("less",)

    def __init__(self, less: np.ndarray):
        less = np.asarray(less, dtype=bool)
        if less.ndim != 2 or less.shape[0] != less.shape[1]:
            raise ValueError("relation matrix must be square")
        self.less = less

    @classmethod
    def empty(cls, n: int) -> PartialOrder:
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> PartialOrder:
        less = np.zeros((n, n), dtype=bool)
        for u, v in pairs:
            if u == v:
                raise CycleError([int(u)])
            less[u, v] = True
        return cls(less)

    @classmethod
    def total(cls, order: Sequence[int], n: int | None = None) -> PartialOrder:
        """Total order on ``order`` (oldest first); other ids stay incomparable."""
        n = (max(order) + 1 if len(order) else 0) if n is None else n
        order = np.asarray(order, dtype=np.int64)
        rank = np.full(n, -1)
        rank[order] = np.arange(order.size)
        inside = rank >= 0
        less = (rank[:, None] < rank[None, :]) & inside[:, None] & inside[None, :]
        return cls(less)

    @classmethod
    def from_clusters(cls, clusters: Sequence[Iterable[int]], n: int) -> PartialOrder:
        """Every node of an earlier cluster precedes every node of a later one."""
        level = np.full(n, -1)
        for i, c in enumerate(clusters):
            for v in c:
                level[v] = i
        inside = level >= 0
        less = (level[:, None] < level[None, :]) & inside[:, None] & inside[None, :]
        return cls(less)

    @property
    def n(self) -> int:
        return self.less.shape[0]

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in zip(*np.nonzero(self.less))]

    def comparable(self) -> np.ndarray:
        """Upper-triangular mask of comparable unordered pairs."""
        return np.triu(self.less | self.less.T, k=1)

    def comparable_count(self) -> int:
        return int(self.comparable().sum())

    def restrict(self, nodes: Iterable[int]) -> PartialOrder:
        keep = np.zeros(self.n, dtype=bool)
        keep[list(nodes)] = True
        return PartialOrder(self.less & keep[:, None] & keep[None, :])

    def reverse(self) -> PartialOrder:
        return PartialOrder(self.less.T.copy())

    def __eq__(self, other) -> bool:
        return isinstance(other, PartialOrder) and np.array_equal(self.less, other.less)

    def __repr__(self) -> str:
        return f"PartialOrder(n={self.n}, pairs={int(self.less.sum())})"

    def check(self) -> None:
        """Raise unless irreflexive, antisymmetric and transitively closed."""
        if self.less.diagonal().any():
            raise CycleError([int(np.flatnonzero(self.less.diagonal())[0])])
        both = self.less & self.less.T
        if both.any():
            u, v = np.argwhere(both)[0]
            raise CycleError([int(u), int(v)])
        if not np.array_equal(transitive_close(self).less, self.less):
            raise ValueError("relation is not transitively closed")


def topological_order(less: np.ndarray) -> list[int]:
    """Kahn's algorithm, oldest first; smallest id first among ready nodes."""
    n = less.shape[0]
    indeg = less.sum(axis=0).astype(np.int64)
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        u = heapq.heappop(ready)
        out.append(u)
        for v in np.flatnonzero(less[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, int(v))
    if len(out) < n:
        raise CycleError(_find_cycle(less, set(range(n)) - set(out)))
    return out


def _find_cycle(less: np.ndarray, candidates: set[int]) -> list[int]:
    # every node Kahn could not emit has a predecessor among the leftovers
    start = min(candidates)
    path, seen = [start], {start: 0}
    u = start
    while True:
        prv = next(int(v) for v in np.flatnonzero(less[:, u]) if int(v) in candidates)
        if prv in seen:
            return path[seen[prv]:][::-1]
        seen[prv] = len(path)
        path.append(prv)
        u = prv


def transitive_close(po: PartialOrder) -> PartialOrder:
    """Smallest transitive superset of the relation; raises CycleError on cycles."""
    less = po.less
    if less.diagonal().any():
        raise CycleError([int(np.flatnonzero(less.diagonal())[0])])
    topo = topological_order(less)
    pos = np.empty(len(topo), dtype=np.int64)
    pos[topo] = np.arange(len(topo))
    closed = less.copy()
    for u in reversed(topo):
        succ = np.flatnonzero(less[u])
        acc = np.zeros(less.shape[0], dtype=bool)
        # nearest successors first; one already reached through another adds nothing
        for v in succ[np.argsort(pos[succ])]:
            if not acc[v]:
                acc |= closed[v]
        closed[u] |= acc
    return PartialOrder(closed)


def to_clusters(po: PartialOrder, nodes: Iterable[int] | None = None) -> list[list[int]]:
    """Ordered clusters C_1 (oldest) .. C_K by peeling the youngest layer.

    Nodes that are older than no remaining node form the youngest cluster;
    they are removed and the step repeats.
    """
    closed = transitive_close(po).less
    remaining = set(range(po.n)) if nodes is None else set(nodes)
    layers = []
    while remaining:
        idx = np.array(sorted(remaining))
        sub = closed[np.ix_(idx, idx)]
        youngest = idx[~sub.any(axis=1)]
        layers.append(sorted(int(v) for v in youngest))
        remaining.difference_update(layers[-1])
    return layers[::-1]


def density(sigma: PartialOrder, sigma_orig: PartialOrder) -> float:
    truth = sigma_orig.comparable()
    denom = int(truth.sum())
    if denom == 0:
        raise NoComparablePairsError("ground truth has no comparable pairs")
    return float((sigma.comparable() & truth).sum()) / denom


def precision(sigma: PartialOrder, sigma_orig: PartialOrder) -> float:
    both = sigma.comparable() & sigma_orig.comparable()
    k = int(both.sum())
    if k == 0:
        raise EmptyIntersectionError("no pair is comparable in both orders")
    agree = np.triu((sigma.less & sigma_orig.less) | (sigma.less.T & sigma_orig.less.T), k=1)
    return float((agree & both).sum()) / k


def random_guess_baseline(n: int) -> float:
    return 0.5


# -- serialization -----------------------------------------------------

def write_order(po: PartialOrder, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n {po.n}\n")
        for u, v in po.pairs():
            fh.write(f"{u} < {v}\n")


def read_order(path: str | Path, n: int | None = None) -> PartialOrder:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s.startswith("# n ") and n is None:
                n = int(s.split()[2])
                continue
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3 or parts[1] != "<":
                raise ValueError(f"line {lineno}: expected 'u < v'")
            pairs.append((int(parts[0]), int(parts[2])))
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    return PartialOrder.from_pairs(n, pairs)


def write_clusters(clusters: Sequence[Iterable[int]], path: str | Path) -> None:
    with open(path, "w") as fh:
        for i, c in enumerate(clusters, start=1):
            for v in sorted(c):
                fh.write(f"{v} {i}\n")


def read_clusters(path: str | Path) -> list[list[int]]:
    by_level: dict[int, list[int]] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'node_id cluster_index'")
            by_level.setdefault(int(parts[1]), []).append(int(parts[0]))
    return [sorted(by_level[k]) for k in sorted(by_level)]
