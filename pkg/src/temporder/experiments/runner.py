"""Synthetic sweeps and real-data runs: estimate, order, score, average."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dd_model import DDParams, generate
from ..estimators import run_estimator
from ..graph_core import Graph, apply_permutation, erdos_renyi_seed, random_seed_fixing_permutation
from ..optimizer import optimal_curve
from ..partial_order import PartialOrder
from ..sampler import DENSE_LIMIT, TrainingPairs, estimate_puv
from .config import ExperimentSpec
from .data import clusters_truth, ingest_real, score_counts, split_training
from .seeding import derive_seed, rng_for

log = logging.getLogger(__name__)


class ExperimentError(RuntimeError):
    pass


@dataclass
class MetricRow:
    alpha: float
    estimator: str
    density: float
    precision: float
    graphs: int
    undefined: int   # repetitions where no scored pair was comparable
    pooled_precision: float = math.nan   # correct / jointly comparable, summed over repetitions

    def as_list(self) -> list[str]:
        return [f"{self.alpha:g}", self.estimator, f"{self.density:.6f}",
                f"{self.precision:.6f}", str(self.graphs), str(self.undefined),
                f"{self.pooled_precision:.6f}"]


TABLE_HEADER = ["alpha", "estimator", "density", "precision", "graphs", "undefined", "pooled_precision"]
CURVE_HEADER = ["alpha", "epsilon", "density", "precision", "kind"]


def synthetic_instance(spec: ExperimentSpec, rep: int) -> tuple[Graph, PartialOrder]:
    """DD graph with scrambled non-seed labels, plus the true order on non-seed nodes."""
    params = DDParams(spec.p, spec.r, spec.n, spec.n0)
    rng = rng_for(spec.seed, "graph", rep)
    g, _ = generate(params, erdos_renyi_seed(spec.n0, spec.p0, rng), rng)
    perm = random_seed_fixing_permutation(spec.n, spec.n0, rng_for(spec.seed, "perm", rep))
    h = apply_permutation(g, perm)
    truth = PartialOrder.total([int(perm[i]) for i in range(spec.n0, spec.n)], spec.n)
    return h, truth


def _score_instance(spec: ExperimentSpec, rep: int, h: Graph, truth: PartialOrder, p: float, r: float):
    """Raw (alpha, label, scored, joint, correct) rows and curve rows for one graph."""
    nodes = h.non_seed_nodes()
    rows, curve = [], []
    greedy = {}
    for cfg in spec.estimators:
        if not cfg.needs_puv:
            greedy[cfg.label] = run_estimator(cfg, h, None, nodes)
    want_puv = any(c.needs_puv for c in spec.estimators) or spec.epsilons
    if want_puv and max(h.adj) + 1 > DENSE_LIMIT:
        log.warning("graph too large for a dense p_uv matrix; skipping p_uv estimators")
        want_puv = False
    unrestricted = None
    for alpha in spec.alphas:
        train = split_training(truth, alpha, rng_for(spec.seed, "split", rep, alpha))
        restriction: TrainingPairs | None = train if len(train) else None
        m = None
        if want_puv and restriction is None and unrestricted is not None:
            m = unrestricted
        elif want_puv:
            try:
                # path seeds ignore alpha, so alpha = 0 reproduces the unsupervised run
                m = estimate_puv(h, p, r, spec.scheme, spec.tries, restriction,
                                 seed=derive_seed(spec.seed, "paths", rep))
            except Exception as exc:
                raise ExperimentError(f"repetition {rep}, alpha={alpha:g}: {exc}") from exc
            if restriction is None:
                unrestricted = m
        for cfg in spec.estimators:
            if cfg.needs_puv:
                if m is None:
                    continue
                order = run_estimator(cfg, h, m, nodes)
            else:
                order = greedy[cfg.label]
            rows.append((alpha, cfg.label, *score_counts(order, truth, train, spec.include_train)))
        if spec.epsilons and m is not None:
            for pt in optimal_curve(m, spec.epsilons, nodes):
                curve.append((alpha, pt.epsilon, pt.density, pt.precision, pt.kind))
    return rows, curve


def _synthetic_job(args):
    spec, rep = args
    h, truth = synthetic_instance(spec, rep)
    return _score_instance(spec, rep, h, truth, spec.p, spec.r)


def aggregate(per_rep: list[list[tuple]]) -> list[MetricRow]:
    """Per-graph means of density and precision; graphs with undefined precision are skipped
    for the precision mean. The pooled precision sums pair counts over graphs instead."""
    keys: list[tuple] = []
    acc: dict[tuple, list] = {}
    for rows in per_rep:
        for alpha, label, scored, joint, correct in rows:
            k = (alpha, label)
            if k not in acc:
                keys.append(k)
                acc[k] = []
            acc[k].append((scored, joint, correct))
    out = []
    for k in keys:
        vals = np.array(acc[k], dtype=float)
        dens = vals[:, 1] / vals[:, 0]
        defined = vals[:, 1] > 0
        prec = vals[defined, 2] / vals[defined, 1]
        pooled = vals[:, 2].sum() / vals[:, 1].sum() if defined.any() else math.nan
        out.append(MetricRow(k[0], k[1], float(dens.mean()),
                             float(prec.mean()) if defined.any() else math.nan,
                             len(vals), int((~defined).sum()), float(pooled)))
    return out


def _average_curve(per_rep: list[list[tuple]]) -> list[tuple]:
    acc: dict[tuple, list] = {}
    for rows in per_rep:
        for alpha, eps, d, th, kind in rows:
            acc.setdefault((alpha, eps, kind), []).append((d, th))
    return [(a, e, float(np.mean([d for d, _ in v])), float(np.mean([t for _, t in v])), kind)
            for (a, e, kind), v in acc.items()]


def run_synthetic(spec: ExperimentSpec, write: bool = True) -> tuple[list[MetricRow], list[tuple]]:
    """Run every repetition and return (table rows, averaged curve rows).

    Repetitions are independent; with ``workers > 1`` they run in a process
    pool and are merged in repetition order, so results do not depend on it.
    """
    jobs = [(spec, rep) for rep in range(spec.graphs)]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(spec.workers) as ex:
            results = list(ex.map(_synthetic_job, jobs))
    else:
        results = [_synthetic_job(j) for j in jobs]
    table = aggregate([r for r, _ in results])
    curve = _average_curve([c for _, c in results])
    if write:
        write_outputs(spec, table, curve)
    return table, curve


def real_instance(spec: ExperimentSpec) -> tuple[Graph, PartialOrder]:
    """Ingest, treat the ``n0`` earliest nodes as the known seed, scramble the rest."""
    g, clusters, _, _ = ingest_real(spec.edges, spec.times or None)
    n = len(g)
    if not 1 <= spec.n0 < n:
        raise ExperimentError(f"n0={spec.n0} must lie in [1, {n})")
    g.n0 = spec.n0
    perm = random_seed_fixing_permutation(n, spec.n0, rng_for(spec.seed, "perm", 0))
    h = apply_permutation(g, perm)
    seeds = set(range(spec.n0))
    moved = [[int(perm[v]) for v in c if v not in seeds] for c in clusters]
    truth = clusters_truth([c for c in moved if c], n)
    return h, truth


def run_real(spec: ExperimentSpec, write: bool = True) -> tuple[list[MetricRow], list[tuple]]:
    h, truth = real_instance(spec)
    rows, curve = _score_instance(spec, 0, h, truth, spec.p, spec.r)
    table = aggregate([rows])
    curve = _average_curve([curve])
    if write:
        write_outputs(spec, table, curve)
    return table, curve


def run_experiment(spec: ExperimentSpec, write: bool = True):
    return run_synthetic(spec, write) if spec.mode == "synthetic" else run_real(spec, write)


def write_outputs(spec: ExperimentSpec, table: list[MetricRow], curve: list[tuple]) -> None:
    out = Path(spec.output)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for row in table:
            w.writerow(row.as_list())
    if curve:
        with open(out / "curve.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CURVE_HEADER)
            for a, e, d, th, kind in curve:
                w.writerow([f"{a:g}", f"{e:g}", f"{d:.6f}", f"{th:.6f}", kind])
