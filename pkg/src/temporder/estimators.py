"""From p_uv (or the raw graph) to a partial order.

Two p_uv-based estimators and four greedy baselines for duplication-divergence
graphs. ``nodes`` restricts the ranked universe (e.g. to non-seed nodes);
everything outside it stays incomparable.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .graph_core import Graph
from .partial_order import PartialOrder, transitive_close
from .puv import PuvMatrix

VARIANTS = ("sort-by-puv-sum", "puv-threshold", "sort-by-degree", "peel-by-degree",
            "sort-by-neighborhood", "peel-by-neighborhood")


@dataclass(frozen=True)
class EstimatorConfig:
    variant: str
    bin_size: int = 1
    tau: float = 0.5
    r_slack: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown estimator {self.variant!r}")
        if self.bin_size < 1:
            raise ValueError("bin size must be >= 1")
        if not 0.5 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0.5, 1]")

    @property
    def label(self) -> str:
        if self.variant in ("sort-by-puv-sum", "sort-by-degree"):
            return f"{self.variant}|C|={self.bin_size}"
        if self.variant == "puv-threshold":
            return f"{self.variant}|tau={self.tau:g}"
        return self.variant

    @property
    def needs_puv(self) -> bool:
        return self.variant in ("sort-by-puv-sum", "puv-threshold")


def _universe(n: int, nodes) -> list[int]:
    return list(range(n)) if nodes is None else sorted(int(v) for v in nodes)


def _chunks(ranked: Sequence[int], size: int) -> list[list[int]]:
    return [list(ranked[i:i + size]) for i in range(0, len(ranked), size)]


def sort_by_puv_sum(m: PuvMatrix, bin_size: int = 1, nodes: Iterable[int] | None = None) -> PartialOrder:
    """Rank by p_u = sum_v p_uv (oldest first) and cut into bins of ``bin_size``."""
    if bin_size < 1:
        raise ValueError("bin size must be >= 1")
    idx = _universe(m.n, nodes)
    sub = m.values[np.ix_(idx, idx)]
    score = sub.sum(axis=1)
    # descending score, ascending id on ties
    ranked = [idx[i] for i in np.lexsort((np.asarray(idx), -score))]
    return PartialOrder.from_clusters(_chunks(ranked, bin_size), m.n)


def puv_threshold(m: PuvMatrix, tau: float, nodes: Iterable[int] | None = None) -> PartialOrder:
    """Keep pairs with p_uv strictly above ``tau``, then close transitively."""
    if tau < 0.5:
        raise ValueError("tau must be >= 0.5")
    keep = np.zeros(m.n, dtype=bool)
    keep[_universe(m.n, nodes)] = True
    vals = m.values
    # p_uv > p_vu guards twins whose complements round to just above 1/2 both ways;
    # a longer cycle means the matrix is inconsistent
    rel = (vals > tau) & (vals > vals.T) & keep[:, None] & keep[None, :]
    np.fill_diagonal(rel, False)
    return transitive_close(PartialOrder(rel))


def _group_bins(ranked: list[int], score: dict[int, float], bin_size: int) -> list[list[int]]:
    """Tie groups stay whole; consecutive groups merge until a bin holds >= bin_size nodes."""
    bins: list[list[int]] = []
    cur: list[int] = []
    i = 0
    while i < len(ranked):
        j = i
        while j < len(ranked) and score[ranked[j]] == score[ranked[i]]:
            j += 1
        cur.extend(ranked[i:j])
        if len(cur) >= bin_size:
            bins.append(cur)
            cur = []
        i = j
    if cur:
        bins.append(cur)
    return bins


def sort_by_degree(h: Graph, bin_size: int = 1, nodes: Iterable[int] | None = None) -> PartialOrder:
    """Higher degree is older. Equal degrees never split across clusters."""
    n = max(h.adj) + 1 if h.adj else 0
    idx = [v for v in _universe(n, nodes) if v in h]
    deg = {v: h.degree(v) for v in idx}
    ranked = sorted(idx, key=lambda v: (-deg[v], v))
    return PartialOrder.from_clusters(_group_bins(ranked, deg, bin_size), n)


def peel_by_degree(h: Graph) -> PartialOrder:
    """Repeatedly strip all minimum-degree nodes as the next-youngest cluster."""
    n = max(h.adj) + 1 if h.adj else 0
    g = h.copy()
    layers = []
    while g.adj:
        low = min(len(nb) for nb in g.adj.values())
        layer = sorted(v for v, nb in g.adj.items() if len(nb) == low)
        layers.append(layer)
        for v in layer:
            for u in g.adj.pop(v):
                if u in g.adj:
                    g.adj[u].discard(v)
    return PartialOrder.from_clusters(layers[::-1], n)


def _neighbourhood_pairs(h: Graph, r_slack: float, idx: list[int]) -> list[tuple[int, int]]:
    pairs = []
    for u in idx:
        nu = h.neighbors(u)
        for v in idx:
            if u == v or h.degree(u) < h.degree(v):
                continue
            if len(h.neighbors(v) - nu) <= r_slack:
                pairs.append((u, v))
    return pairs


def sort_by_neighborhood(h: Graph, r_slack: float = 0.0, nodes: Iterable[int] | None = None) -> PartialOrder:
    """``u`` older than ``v`` when N(v) is (up to ``r_slack`` extra nodes) inside N(u).

    Pairs passing in both directions are dropped, so twins stay incomparable.
    A pair that would close a cycle is skipped; pairs are tried in descending
    |N(u)| order, then by id.
    """
    n = max(h.adj) + 1 if h.adj else 0
    idx = [v for v in _universe(n, nodes) if v in h]
    cand = set(_neighbourhood_pairs(h, r_slack, idx))
    cand = {(u, v) for u, v in cand if (v, u) not in cand}
    less = np.zeros((n, n), dtype=bool)
    if r_slack == 0:
        # containment with the degree guard is already transitive and acyclic
        for u, v in cand:
            less[u, v] = True
        return transitive_close(PartialOrder(less))
    for u, v in sorted(cand, key=lambda e: (-h.degree(e[0]), e[0], e[1])):
        if less[v, u] or less[u, v]:
            continue
        up = less[:, u].copy()
        up[u] = True
        down = less[v].copy()
        down[v] = True
        less |= up[:, None] & down[None, :]
    return PartialOrder(less)


def peel_by_neighborhood(h: Graph, r_slack: float = 0.0) -> PartialOrder:
    """Strip nodes whose neighbourhood fits inside another node's as the youngest cluster.

    Stops at the seed size; a remainder with no strippable node becomes the
    oldest cluster. Isolated nodes fit inside anything and peel first.
    """
    n = max(h.adj) + 1 if h.adj else 0
    g = h.copy()
    layers = []
    while len(g) > max(h.n0, 1):
        layer = []
        for u in sorted(g.adj):
            nu = g.adj[u]
            if any(len(nu - g.adj[v]) <= r_slack for v in g.adj if v != u):
                layer.append(u)
        if not layer:
            break
        layers.append(layer)
        for v in layer:
            for u in g.adj.pop(v):
                if u in g.adj:
                    g.adj[u].discard(v)
    if g.adj:
        layers.append(sorted(g.adj))
    return PartialOrder.from_clusters(layers[::-1], n)


def run_estimator(cfg: EstimatorConfig, h: Graph, m: PuvMatrix | None = None,
                  nodes: Iterable[int] | None = None) -> PartialOrder:
    if cfg.needs_puv and m is None:
        raise ValueError(f"{cfg.variant} needs a p_uv matrix")
    if cfg.variant == "sort-by-puv-sum":
        return sort_by_puv_sum(m, cfg.bin_size, nodes)
    if cfg.variant == "puv-threshold":
        return puv_threshold(m, cfg.tau, nodes)
    if cfg.variant == "sort-by-degree":
        return sort_by_degree(h, cfg.bin_size, nodes)
    if cfg.variant == "peel-by-degree":
        return peel_by_degree(h)
    if cfg.variant == "sort-by-neighborhood":
        return sort_by_neighborhood(h, cfg.r_slack, nodes)
    return peel_by_neighborhood(h, cfg.r_slack)
