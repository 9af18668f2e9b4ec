"""Command-line interface: ``temporder <subcommand> ...``.

Failures exit nonzero and print one JSON line prefixed ``error:`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import degree_theory
from .dd_model import DDParams, generate
from .estimators import VARIANTS, EstimatorConfig, run_estimator
from .experiments import load_spec, run_experiment
from .experiments.runner import TABLE_HEADER
from .experiments.data import evaluate_run
from .graph_core import (Graph, apply_permutation, complete_graph, erdos_renyi_seed,
                         random_seed_fixing_permutation, read_edge_list, write_edge_list)
from .optimizer import optimal_curve, write_curve
from .partial_order import PartialOrder, read_clusters, read_order, to_clusters, write_clusters, write_order
from .puv import PuvMatrix
from .sampler import Scheme, TrainingPairs, estimate_puv


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error(self.prog, "UsageError", message)
        sys.exit(2)


def _emit_error(command: str, kind: str, message: str) -> None:
    print("error: " + json.dumps({"command": command, "type": kind, "message": message}),
          file=sys.stderr)


def cmd_generate(a) -> None:
    rng = np.random.default_rng(a.seed)
    seed_graph = complete_graph(a.n0) if a.p0 >= 1.0 else erdos_renyi_seed(a.n0, a.p0, rng)
    g, _ = generate(DDParams(a.p, a.r, a.n, a.n0), seed_graph, rng)
    perm = np.arange(a.n)
    if not a.no_scramble:
        perm = random_seed_fixing_permutation(a.n, a.n0, rng)
        g = apply_permutation(g, perm)
    write_edge_list(g, a.out)
    if a.truth:
        # non-seed nodes only, cluster index = arrival rank (1 = oldest)
        write_clusters([[int(perm[i])] for i in range(a.n0, a.n)], a.truth)
    print(f"nodes={len(g)} edges={g.edge_count()} n0={g.n0}")


def _load_graph(path, n0):
    g, _ = read_edge_list(path, n0)
    if sorted(g.adj) != list(range(len(g))):
        raise CLIError("graph node ids must be dense 0..n-1")
    return g


def cmd_estimate(a) -> None:
    g = _load_graph(a.graph, a.n0)
    train = None
    if a.train:
        train = TrainingPairs.from_order(read_order(a.train, len(g)))
    m = estimate_puv(g, a.p, a.r, Scheme(a.scheme), a.tries, train, seed=a.seed,
                     checkpoint=a.checkpoint, workers=a.workers)
    m.to_csv(a.out)
    print(f"paths={m.meta['paths']} scheme={a.scheme} nodes={m.n}")


def cmd_order(a) -> None:
    cfg = EstimatorConfig(a.estimator, a.bin_size, a.tau, a.r_slack)
    g = _load_graph(a.graph, a.n0) if a.graph else None
    m = PuvMatrix.from_csv(a.puv, n0=a.n0 if g is None else g.n0) if a.puv else None
    if g is None and not cfg.needs_puv:
        raise CLIError(f"{cfg.variant} needs --graph")
    n = m.n if m is not None else len(g)
    n0 = g.n0 if g is not None else a.n0
    if g is None:
        g = Graph(n, n0=n0)
    nodes = range(n0, n)
    po = run_estimator(cfg, g, m, nodes)
    if a.out:
        write_order(po, a.out)
    if a.clusters_out:
        write_clusters(to_clusters(po, nodes), a.clusters_out)
    print(f"estimator={cfg.label} comparable_pairs={po.comparable_count()}")


def cmd_curve(a) -> None:
    m = PuvMatrix.from_csv(a.puv, n0=a.n0)
    pts = optimal_curve(m, a.epsilons, range(a.n0, m.n))
    if a.out:
        write_curve(pts, a.out)
    for pt in pts:
        print(f"{pt.epsilon:g},{pt.density:.6f},{pt.precision:.6f},{pt.kind}")


def cmd_eval(a) -> None:
    clusters = read_clusters(a.truth)
    n = 1 + max(v for c in clusters for v in c)
    order = read_order(a.order)
    n = max(n, order.n)
    truth = PartialOrder.from_clusters(clusters, n)
    if order.n < n:
        order = PartialOrder.from_pairs(n, order.pairs())
    train = TrainingPairs.from_order(read_order(a.train, n)) if a.train else None
    d, th = evaluate_run(order, truth, train, a.include_train)
    print("density,precision")
    print(f"{d:.6f},{th:.6f}")


def cmd_experiment(a) -> None:
    overrides = list(a.set or [])
    if a.output:
        overrides.append(f"experiment.output={json.dumps(a.output)}")
    if a.workers:
        overrides.append(f"experiment.workers={a.workers}")
    spec = load_spec(a.config, overrides)
    table, curve = run_experiment(spec)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for row in table:
        w.writerow(row.as_list())
    print(f"# wrote {Path(spec.output) / 'table.csv'}", file=sys.stderr)


def cmd_degree(a) -> None:
    rng = np.random.default_rng(a.seed)
    s_values = [s for s in a.s_values if a.n0 < s <= a.n]
    t_values = [t for t in a.t_values if t <= a.n]
    reports, tables = [], []
    for p in a.p:
        params = DDParams(p, a.r, a.n, a.n0)
        sim = degree_theory.simulate_degrees(params, s_values, t_values, a.runs, rng)
        rep = degree_theory.fit_scaling(sim, p)
        reports.append(rep.row())
        for row in degree_theory.recursion_table(sim, params):
            tables.append({"p": p, **row})
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "t_exponent", "target_t", "s_exponent", "target_s", "edge_slope", "target_edge"])
    for r in reports:
        w.writerow([r["p"], f"{r['t_exponent']:.4f}", r["p"], f"{r['s_exponent']:.4f}",
                    f"{2 * r['p'] - 1:g}", f"{r['edge_slope']:.4f}", f"{2 * r['p']:g}"])
    if a.out:
        with open(a.out, "w", newline="") as fh:
            dw = csv.DictWriter(fh, fieldnames=list(tables[0]), lineterminator="\n")
            dw.writeheader()
            dw.writerows(tables)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="temporder", description="Arrival-order inference for duplication-divergence graphs.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="grow a DD graph and write it with its true order")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--n0", type=int, required=True)
    g.add_argument("--p0", type=float, default=1.0, help="seed edge probability (1 = complete seed)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-scramble", action="store_true", help="keep ids equal to arrival ranks")
    g.add_argument("--out", required=True)
    g.add_argument("--truth", help="write true arrival ranks of non-seed nodes here")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate-puv", help="sample paths and write the p_uv matrix as CSV")
    e.add_argument("graph")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--r", type=float, required=True)
    e.add_argument("--n0", type=int, default=0, help="seed size if the edge list has no header")
    e.add_argument("--scheme", choices=[s.value for s in Scheme], default="local-unif")
    e.add_argument("--tries", type=int, default=10000)
    e.add_argument("--train", help="known pairs file ('u < v' lines)")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--checkpoint", help="resumable accumulator file (.npz)")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_estimate)

    o = sub.add_parser("order", help="turn p_uv or a graph into a partial order")
    o.add_argument("--puv")
    o.add_argument("--graph")
    o.add_argument("--n0", type=int, default=0)
    o.add_argument("--estimator", choices=VARIANTS, default="sort-by-puv-sum")
    o.add_argument("--bin-size", type=int, default=1)
    o.add_argument("--tau", type=float, default=0.5)
    o.add_argument("--r-slack", type=float, default=0.0)
    o.add_argument("--out")
    o.add_argument("--clusters-out")
    o.set_defaults(func=cmd_order)

    c = sub.add_parser("curve", help="optimal precision per density (exact IP or LP bound)")
    c.add_argument("--puv", required=True)
    c.add_argument("--n0", type=int, default=0)
    c.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.4, 0.6, 0.8, 1.0])
    c.add_argument("--out")
    c.set_defaults(func=cmd_curve)

    v = sub.add_parser("eval", help="density and precision of an order against the truth")
    v.add_argument("--order", required=True)
    v.add_argument("--truth", required=True, help="'node cluster' file, 1 = oldest")
    v.add_argument("--train")
    v.add_argument("--include-train", action="store_true")
    v.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a TOML experiment spec")
    x.add_argument("config")
    x.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    x.add_argument("--output")
    x.add_argument("--workers", type=int)
    x.set_defaults(func=cmd_experiment)

    d = sub.add_parser("degree-check", help="mean-degree scaling and recursion report")
    d.add_argument("--p", type=float, nargs="+", default=[0.6, 0.75, 0.9])
    d.add_argument("--r", type=float, default=0.5)
    d.add_argument("--n", type=int, default=500)
    d.add_argument("--n0", type=int, default=20)
    d.add_argument("--runs", type=int, default=200)
    d.add_argument("--s-values", type=int, nargs="+", default=[25, 50, 100, 200])
    d.add_argument("--t-values", type=int, nargs="+", default=[100, 200, 300, 400, 500])
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", help="recursion table CSV")
    d.set_defaults(func=cmd_degree)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        a.func(a)
    except KeyboardInterrupt:
        _emit_error(a.command, "Interrupted", "interrupted")
        return 130
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable line
        _emit_error(a.command, type(exc).__name__, str(exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
