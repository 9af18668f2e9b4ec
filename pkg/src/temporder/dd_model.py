"""Duplication-divergence growth (Pastor-Satorras variant) and its step likelihood.

A new node picks a uniform parent, keeps each of the parent's edges with
probability ``p`` and links to every node outside the parent's neighbourhood
with probability ``r / k`` (``k`` = current size). Likelihoods are carried in
log space; ``0 * log 0`` counts as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_core import Graph, GraphError


@dataclass(frozen=True)
class DDParams:
    p: float
    r: float
    n: int
    n0: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.r < 0:
            raise ValueError(f"r must be non-negative, got {self.r}")
        if not self.n >= self.n0 >= 1:
            raise ValueError(f"need n >= n0 >= 1, got n={self.n}, n0={self.n0}")
        # r / k <= 1 for every growth step k in [n0, n)
        if self.n > self.n0 and self.r > self.n0:
            raise ValueError(f"r/k exceeds 1 at k={self.n0} (r={self.r})")

    @property
    def interior(self) -> bool:
        """True when every arrival order has positive probability."""
        return 0.0 < self.p < 1.0 and self.r > 0.0


def _xlog(count: int, prob: float) -> float:
    if count == 0:
        return 0.0
    if prob <= 0.0:
        return -math.inf
    return count * math.log(prob)


def log_parent_term(a: int, b: int, c: int, k: int, p: float, r: float) -> float:
    """log of one parent's contribution given the three set sizes.

    ``a`` shared neighbours, ``b`` parent-only neighbours, ``c`` child-only
    neighbours, ``k`` nodes other than the child.
    """
    q = r / k
    if q > 1.0:
        raise ValueError(f"r/(t-1) = {q} exceeds 1")
    rest = k - a - b - c
    return (-math.log(k) + _xlog(a, p) + _xlog(b, 1.0 - p)
            + _xlog(c, q) + _xlog(rest, 1.0 - q))


def log_parent_likelihood(h: Graph, v: int, u: int, p: float, r: float) -> float:
    if u == v:
        raise GraphError("parent and child must differ")
    if u not in h or v not in h:
        raise GraphError("both nodes must be present")
    nv = h.neighbors(v)
    nu = h.neighbors(u) - {v}
    a = len(nv & nu)
    return log_parent_term(a, len(nu) - a, len(nv) - a, len(h) - 1, p, r)


def parent_likelihood(h: Graph, v: int, u: int, p: float, r: float) -> float:
    """Probability that ``v`` was created last, from parent ``u``."""
    return math.exp(log_parent_likelihood(h, v, u, p, r))


def log_step_likelihood(h: Graph, v: int, p: float, r: float) -> float:
    if len(h) <= h.n0:
        raise GraphError("graph has no non-seed node left to remove")
    terms = [log_parent_likelihood(h, v, u, p, r) for u in h.adj if u != v]
    top = max(terms)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(x - top) for x in terms))


def step_likelihood(h: Graph, v: int, p: float, r: float) -> float:
    """Probability that the graph without ``v`` grows into ``h`` in one step."""
    return math.exp(log_step_likelihood(h, v, p, r))


def removable_set(h: Graph, p: float, r: float) -> set[int]:
    if len(h) <= h.n0:
        return set()
    cand = {v for v in h.adj if v >= h.n0}
    if 0.0 < p < 1.0 and r > 0.0:
        return cand
    return {v for v in cand if log_step_likelihood(h, v, p, r) > -math.inf}


def grow_matrix(params: DDParams, seed_graph: Graph, rng: np.random.Generator) -> np.ndarray:
    """Boolean adjacency matrix of a grown graph; row ``k`` is the k-th arrival."""
    n0, n = params.n0, params.n
    if len(seed_graph) != n0:
        raise ValueError(f"seed graph has {len(seed_graph)} nodes, expected n0={n0}")
    adj = np.zeros((n, n), dtype=bool)
    for a, b in seed_graph.edges():
        adj[a, b] = adj[b, a] = True
    p, r = params.p, params.r
    for k in range(n0, n):
        parent = rng.integers(k)
        nb = adj[parent, :k]
        copied = nb & (rng.random(k) < p)
        extra = ~nb & (rng.random(k) < r / k)
        row = copied | extra
        adj[k, :k] = row
        adj[:k, k] = row
    return adj


def generate(params: DDParams, seed_graph: Graph, rng: np.random.Generator) -> tuple[Graph, list[int]]:
    """Grow ``seed_graph`` to ``params.n`` nodes.

    Node ids equal arrival ranks, so the returned order is ``0..n-1``.
    """
    adj = grow_matrix(params, seed_graph, rng)
    iu, ju = np.nonzero(np.triu(adj, 1))
    return Graph(params.n, zip(iu.tolist(), ju.tolist()), n0=params.n0), list(range(params.n))
