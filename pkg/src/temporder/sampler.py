"""Sequential importance sampling of backward peeling paths.

Each path removes non-seed nodes one at a time (youngest first) until only
the seed is left. Its log weight is the sum over steps of
``log w(step) - log q(step)``, where ``q`` is the proposal probability of the
chosen removal. The self-normalised average of arrival indicators over paths
estimates p_uv.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

import numpy as np

from . import _kernels as K
from .graph_core import Graph
from .partial_order import PartialOrder, transitive_close
from .puv import PuvMatrix, apply_seed_convention

log = logging.getLogger(__name__)

DENSE_LIMIT = 5000
CHUNK = 4096


class Scheme(str, Enum):
    LOCAL_UNIF = "local-unif"
    HIGH_PROB = "high-prob"
    ACCEPT_REJECT = "accept-reject"

    @property
    def code(self) -> int:
        return {"local-unif": K.LOCAL_UNIF, "high-prob": K.HIGH_PROB,
                "accept-reject": K.ACCEPT_REJECT}[self.value]


class TrainingPairs:
    """Known (older, younger) pairs, kept transitively closed."""

    def __init__(self, n: int, pairs: Iterable[tuple[int, int]] = ()):
        self.order = transitive_close(PartialOrder.from_pairs(n, pairs))

    @classmethod
    def from_order(cls, po: PartialOrder) -> TrainingPairs:
        tp = cls.__new__(cls)
        tp.order = transitive_close(po)
        return tp

    @property
    def n(self) -> int:
        return self.order.n

    def pairs(self) -> list[tuple[int, int]]:
        return self.order.pairs()

    def __len__(self) -> int:
        return int(self.order.less.sum())

    def blocked(self, present: Iterable[int]) -> set[int]:
        """Nodes that cannot be removed while a known-younger node is present."""
        present = list(present)
        mask = np.zeros(self.n, dtype=bool)
        mask[[v for v in present if v < self.n]] = True
        return {u for u in present if u < self.n and (self.order.less[u] & mask).any()}


@dataclass
class SamplePath:
    removed_sequence: list[int]     # youngest first
    log_weight: float

    @property
    def arrival_order(self) -> list[int]:
        return self.removed_sequence[::-1]

    def arrival_rank(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.arrival_order)}


@dataclass
class _Prepared:
    bits: np.ndarray
    present: np.ndarray
    is_seed: np.ndarray
    younger: np.ndarray
    restricted: bool
    m: int
    n: int
    n0: int


def _prepare(h: Graph, restriction: TrainingPairs | None) -> _Prepared:
    n = max(h.adj) + 1 if h.adj else 0
    bits = h.to_bitsets(n)
    present = np.zeros(n, dtype=np.bool_)
    present[list(h.adj)] = True
    is_seed = np.zeros(n, dtype=np.bool_)
    is_seed[: h.n0] = True
    younger = np.zeros_like(bits)
    restricted = restriction is not None and len(restriction) > 0
    if restricted:
        less = restriction.order.less
        for u, v in zip(*np.nonzero(less)):
            if u < n and v < n:
                younger[u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
    m = int(present.sum()) - h.n0
    return _Prepared(bits, present, is_seed, younger, restricted, m, n, h.n0)


def _master_seed(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(2**63))
    return int(seed) & (2**64 - 1)


def _interior(p: float, r: float) -> bool:
    return 0.0 < p < 1.0 and r > 0.0


def sample_paths(h: Graph, p: float, r: float, scheme: Scheme | str = Scheme.LOCAL_UNIF,
                 k: int = 1, restriction: TrainingPairs | None = None, seed=0,
                 start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Raw paths ``start .. start+k-1``: (removal sequences, log weights).

    Path ``i`` depends only on ``(seed, i)``.
    """
    scheme = Scheme(scheme)
    prep = _prepare(h, restriction)
    return _run(prep, p, r, scheme, _master_seed(seed), start, k)


def _run(prep: _Prepared, p, r, scheme: Scheme, master: int, start: int, k: int):
    if r / max(prep.m + prep.n0 - 1, 1) > 1.0:
        raise ValueError("r/(t-1) exceeds 1 for this graph")
    return K.run_paths(prep.bits, prep.present, prep.is_seed, prep.younger, prep.restricted,
                       float(p), float(r), scheme.code, _interior(p, r),
                       np.uint64(master), start, k, prep.m)


def sample_path(h: Graph, p: float, r: float, scheme: Scheme | str = Scheme.LOCAL_UNIF,
                restriction: TrainingPairs | None = None, seed=0, index: int = 0) -> SamplePath:
    rem, lw = sample_paths(h, p, r, scheme, 1, restriction, seed, start=index)
    return SamplePath([int(x) for x in rem[0]], float(lw[0]))


class PuvAccumulator:
    """Running self-normalised sums; checkpointable."""

    def __init__(self, n: int, master: int, pairs: np.ndarray | None = None):
        self.n = n
        self.master = master
        self.pairs = pairs
        size = (n, n) if pairs is None else (len(pairs),)
        self.num = np.zeros(size)
        self.state = np.array([-np.inf, 0.0])
        self.done = 0

    def add(self, removals: np.ndarray, logw: np.ndarray) -> None:
        if self.pairs is None:
            K.accumulate(removals, logw, self.num, self.state)
        else:
            K.accumulate_pairs(removals, logw, self.pairs[:, 0].copy(), self.pairs[:, 1].copy(),
                               self.num, self.state)
        self.done += len(logw)

    def save(self, path: str | Path) -> None:
        extra = {} if self.pairs is None else {"pairs": self.pairs}
        np.savez(path, num=self.num, state=self.state, done=self.done, master=np.uint64(self.master),
                 n=self.n, **extra)

    @classmethod
    def load(cls, path: str | Path) -> PuvAccumulator:
        with np.load(path) as z:
            acc = cls(int(z["n"]), int(z["master"]), z["pairs"] if "pairs" in z else None)
            acc.num = z["num"].copy()
            acc.state = z["state"].copy()
            acc.done = int(z["done"])
        return acc


def _chunk_job(args):
    prep, p, r, scheme, master, start, count = args
    return _run(prep, p, r, scheme, master, start, count)


def estimate_puv(h: Graph, p: float, r: float, scheme: Scheme | str = Scheme.LOCAL_UNIF,
                 k: int = 1000, restriction: TrainingPairs | None = None, seed=0, *,
                 chunk: int = CHUNK, checkpoint: str | Path | None = None,
                 stop_after: int | None = None, workers: int = 1,
                 pairs: Iterable[tuple[int, int]] | None = None) -> PuvMatrix:
    """Self-normalised estimate of p_uv from ``k`` sampled paths.

    With ``checkpoint`` set, partial sums are written after every chunk and an
    existing file is resumed; ``stop_after`` ends the run early (for
    interruptible jobs). Results do not depend on ``chunk`` or ``workers``.
    Above ``DENSE_LIMIT`` nodes pass ``pairs`` to track only those entries;
    the returned matrix is then a ``len(pairs) x 1`` column in ``meta['pairs']``.
    """
    if k < 1:
        raise ValueError("need at least one path")
    scheme = Scheme(scheme)
    prep = _prepare(h, restriction)
    master = _master_seed(seed)
    pair_arr = None if pairs is None else np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    if pair_arr is None and prep.n > DENSE_LIMIT:
        raise MemoryError(f"{prep.n} nodes exceeds the dense limit {DENSE_LIMIT}; pass pairs=")

    acc = None
    if checkpoint is not None and Path(checkpoint).exists():
        acc = PuvAccumulator.load(checkpoint)
        if acc.master != master or acc.n != prep.n:
            raise ValueError("checkpoint was written for a different seed or graph")
    if acc is None:
        acc = PuvAccumulator(prep.n, master, pair_arr)

    target = k if stop_after is None else min(k, stop_after)
    starts = list(range(acc.done, target, chunk))
    jobs = [(prep, p, r, scheme, master, s, min(chunk, target - s)) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = ex.map(_chunk_job, jobs)   # yields in submission order
            for rem, lw in results:
                acc.add(rem, lw)
                if checkpoint is not None:
                    acc.save(checkpoint)
    else:
        for job in jobs:
            rem, lw = _chunk_job(job)
            acc.add(rem, lw)
            if checkpoint is not None:
                acc.save(checkpoint)
    return _finish(acc, h, restriction, scheme, k)


def _finish(acc: PuvAccumulator, h: Graph, restriction, scheme: Scheme, k: int) -> PuvMatrix:
    den = acc.state[1]
    assert den > 0 and math.isfinite(den), "all path weights vanished"
    meta = {"paths": acc.done, "scheme": scheme.value, "target": k}
    if acc.pairs is not None:
        meta["pairs"] = acc.pairs
        return PuvMatrix((acc.num / den)[:, None], n0=h.n0,
                         provenance=f"sampled({acc.done}, {scheme.value})", meta=meta)
    vals = acc.num / den
    if restriction is not None and len(restriction):
        less = restriction.order.less[: acc.n, : acc.n]
        vals[less] = 1.0
        vals[less.T] = 0.0
    absent = np.ones(acc.n, dtype=bool)
    absent[list(h.adj)] = False
    vals[absent, :] = 0.0
    vals[:, absent] = 0.0
    apply_seed_convention(vals, h.n0)
    return PuvMatrix(vals, n0=h.n0, provenance=f"sampled({acc.done}, {scheme.value})", meta=meta)


@dataclass
class MeanCheck:
    log_mean: float
    mean: float
    stderr: float
    k: int


def weighted_mean_check(h: Graph, p: float, r: float, scheme: Scheme | str = Scheme.LOCAL_UNIF,
                        k: int = 1000, seed=0) -> MeanCheck:
    """Empirical mean of the path weights, an unbiased estimate of the exact denominator."""
    _, lw = sample_paths(h, p, r, scheme, k, None, seed)
    if lw.size == 0 or len(h) == h.n0:
        return MeanCheck(0.0, 1.0, 0.0, k)
    top = lw.max()
    scaled = np.exp(lw - top)
    mean_scaled = scaled.mean()
    se_scaled = scaled.std(ddof=1) / math.sqrt(k) if k > 1 else math.inf
    scale = math.exp(top)
    return MeanCheck(top + math.log(mean_scaled), mean_scaled * scale, se_scaled * scale, k)
