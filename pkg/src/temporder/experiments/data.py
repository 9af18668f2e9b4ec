"""Ground truth handling: real temporal edge lists, training splits and scoring."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..graph_core import Graph, GraphError, parse_edge_lines
from ..partial_order import PartialOrder
from ..sampler import TrainingPairs

log = logging.getLogger(__name__)


class EmptyTestSetError(ValueError):
    pass


def split_size(truth: PartialOrder, alpha: float) -> int:
    """Number of pairs sampled before closure: floor(alpha * |K(truth)|)."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return math.floor(alpha * truth.comparable_count())


def split_training(truth: PartialOrder, alpha: float, rng: np.random.Generator) -> TrainingPairs:
    """Sample floor(alpha * |K(truth)|) comparable pairs as known training pairs.

    The sample is transitively closed; pairs added by the closure are free
    information and count as training pairs too.
    """
    count = split_size(truth, alpha)
    pairs = truth.pairs()
    if alpha > 0 and count == 0:
        log.warning("alpha=%g of %d comparable pairs rounds to no training pairs", alpha, len(pairs))
    if count == 0:
        return TrainingPairs(truth.n)
    pick = rng.choice(len(pairs), size=count, replace=False)
    return TrainingPairs(truth.n, [pairs[i] for i in np.sort(pick)])


def held_out_order(truth: PartialOrder, train: TrainingPairs | None) -> PartialOrder:
    """Ground truth with every training pair (either direction) removed."""
    if train is None or len(train) == 0:
        return truth
    known = train.order.less | train.order.less.T
    return PartialOrder(truth.less & ~known)


def score_counts(order: PartialOrder, truth: PartialOrder, train: TrainingPairs | None = None,
                 include_train: bool = False) -> tuple[int, int, int]:
    """(scored pairs, jointly comparable pairs, correctly directed pairs)."""
    target = truth if include_train else held_out_order(truth, train)
    scored = target.comparable()
    if not scored.any():
        raise EmptyTestSetError("no comparable test pairs left")
    joint = order.comparable() & scored
    agree = np.triu((order.less & target.less) | (order.less.T & target.less.T), k=1) & joint
    return int(scored.sum()), int(joint.sum()), int(agree.sum())


def evaluate_run(order: PartialOrder, truth: PartialOrder, train: TrainingPairs | None = None,
                 include_train: bool = False) -> tuple[float, float]:
    """(density, precision) of ``order``; training pairs earn no credit unless included.

    Precision is NaN when no scored pair is comparable in ``order``.
    """
    scored, joint, correct = score_counts(order, truth, train, include_train)
    return joint / scored, (correct / joint if joint else math.nan)


def ingest_real(edge_path: str | Path, time_path: str | Path | None = None):
    """Temporal edge list -> (graph, ground-truth clusters, id map).

    With no ``time_path`` every edge line needs a third column (time) and a
    node's timestamp is its first incident edge. Otherwise ``time_path``
    holds ``node time`` lines and every node must appear there. Nodes are
    renumbered 0..n-1 by (timestamp, original id); directions are dropped,
    repeated edges and self-loops are collapsed with a warning count.
    """
    with open(edge_path) as fh:
        rows = list(parse_edge_lines(fh, with_time=time_path is None))
    stamp: dict[int, float] = {}
    if time_path is None:
        for u, v, t in rows:
            for x in (u, v):
                if x not in stamp or t < stamp[x]:
                    stamp[x] = t
        pairs = [(u, v) for u, v, _ in rows]
    else:
        pairs = rows
        with open(time_path) as fh:
            for lineno, line in enumerate(fh, 1):
                s = line.strip()
                if not s or s.startswith("#"):
                    continue
                parts = s.split()
                if len(parts) < 2:
                    raise GraphError(f"{time_path} line {lineno}: expected 'node time'")
                stamp[int(parts[0])] = float(parts[1])
        missing = sorted({x for e in pairs for x in e} - set(stamp))
        if missing:
            raise GraphError(f"{len(missing)} nodes have no timestamp, e.g. {missing[:5]}")
    nodes = sorted({x for e in pairs for x in e} | set(stamp), key=lambda x: (stamp[x], x))
    idmap = {old: new for new, old in enumerate(nodes)}
    g = Graph(len(nodes))
    dropped = 0
    for u, v in pairs:
        a, b = idmap[u], idmap[v]
        if a == b or g.has_edge(a, b):
            dropped += 1
            continue
        g.add_edge(a, b)
    if dropped:
        log.warning("collapsed %d repeated edges or self-loops", dropped)
    clusters: list[list[int]] = []
    last = None
    for old in nodes:
        if stamp[old] != last:
            clusters.append([])
            last = stamp[old]
        clusters[-1].append(idmap[old])
    return g, clusters, idmap, dropped


def clusters_truth(clusters: Sequence[Sequence[int]], n: int, exclude=()) -> PartialOrder:
    ex = set(exclude)
    return PartialOrder.from_clusters([[v for v in c if v not in ex] for c in clusters], n)
