"""Brute-force oracles: arrival-order enumeration and exact p_uv.

Only non-seed nodes are permuted; seed labels stay fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dd_model import log_step_likelihood
from .graph_core import Graph, delete_node
from .puv import PuvMatrix, apply_seed_convention

MAX_FREE_NODES = 10


class EnumerationTooLarge(ValueError):
    pass


class InfeasibleGraph(ValueError):
    """No arrival order has positive probability under the model."""


@dataclass
class OrderProbabilityTable:
    nodes: list[int]          # non-seed node ids
    orders: np.ndarray        # (k, m) arrival orders, oldest first
    log_probs: np.ndarray     # log P[G = sigma^{-1}(H)] per order
    n: int
    n0: int

    @property
    def log_denominator(self) -> float:
        if self.log_probs.size == 0:
            return -math.inf
        return float(np.logaddexp.reduce(self.log_probs))

    def conditional(self) -> np.ndarray:
        return np.exp(self.log_probs - self.log_denominator)

    def probability_of(self, order) -> float:
        """Conditional probability of one arrival order (oldest first)."""
        target = np.asarray(order)
        hit = np.all(self.orders == target, axis=1)
        return float(self.conditional()[hit].sum())

    def puv(self) -> PuvMatrix:
        if self.log_probs.size == 0:
            raise InfeasibleGraph("no feasible arrival order")
        w = self.conditional()
        vals = np.zeros((self.n, self.n))
        m = len(self.nodes)
        for i in range(m):
            for j in range(i + 1, m):
                older = self.orders[:, i]
                younger = self.orders[:, j]
                np.add.at(vals, (older, younger), w)
        return PuvMatrix(apply_seed_convention(vals, self.n0), n0=self.n0, provenance="exact")


def _guard(h: Graph) -> list[int]:
    free = h.non_seed_nodes()
    if len(free) > MAX_FREE_NODES:
        raise EnumerationTooLarge(
            f"{len(free)} non-seed nodes; exact enumeration is limited to n - n0 <= {MAX_FREE_NODES}")
    return free


class _StepCache:
    """log w(delta(H_S, v), H_S) keyed by the present non-seed subset (bitmask)."""

    def __init__(self, h: Graph, free: list[int], p: float, r: float):
        self.h, self.free, self.p, self.r = h, free, p, r
        self.bit = {v: 1 << i for i, v in enumerate(free)}
        self._cache: dict[tuple[int, int], float] = {}

    def graph(self, mask: int) -> Graph:
        g = self.h.copy()
        for v in self.free:
            if not mask & self.bit[v]:
                g.remove_node(v)
        return g

    def logw(self, mask: int, v: int) -> float:
        key = (mask, v)
        if key not in self._cache:
            g = self.graph(mask)
            self._cache[key] = log_step_likelihood(g, v, self.p, self.r)
        return self._cache[key]


def enumerate_orders(h: Graph, p: float, r: float) -> OrderProbabilityTable:
    """Every seed-fixing arrival order with positive probability of producing ``h``."""
    free = _guard(h)
    n = max(h.adj) + 1 if h.adj else 0
    cache = _StepCache(h, free, p, r)
    full = (1 << len(free)) - 1
    orders: list[list[int]] = []
    logs: list[float] = []

    def dfs(mask: int, removed: list[int], acc: float):
        if mask == 0:
            orders.append(removed[::-1])
            logs.append(acc)
            return
        for v in free:
            if mask & cache.bit[v]:
                lw = cache.logw(mask, v)
                if lw == -math.inf:
                    continue
                removed.append(v)
                dfs(mask & ~cache.bit[v], removed, acc + lw)
                removed.pop()

    # one block per first-removed node, merged in a fixed order
    for v in free:
        lw = cache.logw(full, v)
        if lw > -math.inf:
            dfs(full & ~cache.bit[v], [v], lw)
    if not free:
        orders.append([])
        logs.append(0.0)
    arr = np.array(orders, dtype=np.int64).reshape(len(orders), len(free))
    return OrderProbabilityTable(free, arr, np.array(logs, dtype=float), n, h.n0)


def exact_puv(h: Graph, p: float, r: float) -> PuvMatrix:
    """p_uv by dynamic programming over present subsets.

    Forward mass F(S) of reaching subset S from the full graph and backward
    mass B(S) of peeling S down to the seed combine as
    P(v removed while u present) = sum_S F(S) w(S, v) B(S - v) / B(full).
    """
    free = _guard(h)
    n = max(h.adj) + 1 if h.adj else 0
    m = len(free)
    cache = _StepCache(h, free, p, r)
    full = (1 << m) - 1
    size = 1 << m
    logB = np.full(size, -np.inf)
    logB[0] = 0.0
    for mask in range(1, size):   # subsets ascend, so S - v is already done
        terms = [cache.logw(mask, v) + logB[mask & ~cache.bit[v]]
                 for v in free if mask & cache.bit[v]]
        logB[mask] = np.logaddexp.reduce(terms)
    if logB[full] == -np.inf:
        raise InfeasibleGraph("no feasible arrival order; graph does not fit the model")
    logF = np.full(size, -np.inf)
    logF[full] = 0.0
    vals = np.zeros((n, n))
    for mask in range(full, 0, -1):   # supersets before subsets
        if logF[mask] == -np.inf:
            continue
        present = [v for v in free if mask & cache.bit[v]]
        for v in present:
            lw = cache.logw(mask, v)
            if lw == -np.inf:
                continue
            sub = mask & ~cache.bit[v]
            logF[sub] = np.logaddexp(logF[sub], logF[mask] + lw)
            mass = math.exp(logF[mask] + lw + logB[sub] - logB[full])
            for u in present:
                if u != v:
                    vals[u, v] += mass
    return PuvMatrix(apply_seed_convention(vals, h.n0), n0=h.n0, provenance="exact")


def denominator_recursive(h: Graph, p: float, r: float) -> float:
    """log p^denom via the removal recursion on peeled graphs, memoised by node set."""
    _guard(h)

    @lru_cache(maxsize=None)
    def rec(key: frozenset) -> float:
        g = h.copy()
        for v in set(h.adj) - key:
            g.remove_node(v)
        if len(g) == g.n0:
            return 0.0
        terms = []
        for v in g.non_seed_nodes():
            lw = log_step_likelihood(g, v, p, r)
            if lw > -math.inf:
                terms.append(lw + rec(frozenset(delete_node(g, v).adj)))
        return float(np.logaddexp.reduce(terms)) if terms else -math.inf

    return rec(frozenset(h.adj))
