import logging
from pathlib import Path

import numpy as np
import pytest

from temporder.estimators import EstimatorConfig
from temporder.experiments import (ConfigError, EmptyTestSetError, ExperimentSpec, derive_seed,
                                   evaluate_run, held_out_order, ingest_real, load_spec,
                                   parse_override, run_experiment, run_synthetic, split_size,
                                   split_training, synthetic_instance)
from temporder.experiments import aggregate
from temporder.experiments.data import clusters_truth
from temporder.graph_core import GraphError
from temporder.partial_order import PartialOrder
from temporder.sampler import Scheme, TrainingPairs

DATA = Path(__file__).parent / "data"


def tiny_spec(**kw):
    base = dict(mode="synthetic", seed=3, graphs=2, n=12, n0=4, p0=0.6, p=0.3, r=1.0,
                scheme=Scheme.LOCAL_UNIF, tries=300,
                estimators=[EstimatorConfig("sort-by-puv-sum"), EstimatorConfig("puv-threshold", tau=0.9),
                            EstimatorConfig("sort-by-degree"), EstimatorConfig("peel-by-neighborhood")],
                alphas=[0.0, 0.1])
    base.update(kw)
    return ExperimentSpec(**base)


def test_derive_seed_is_stable_and_label_sensitive():
    assert derive_seed(1, "graph", 0) == derive_seed(1, "graph", 0)
    assert len({derive_seed(1, "graph", 0), derive_seed(1, "graph", 1), derive_seed(2, "graph", 0),
                derive_seed(1, "perm", 0)}) == 4
    assert 0 <= derive_seed(123, "x") < 2**63


def test_split_sizes(caplog):
    truth = PartialOrder.total(list(range(50)))
    assert split_size(truth, 0.01) == 12
    train = split_training(truth, 0.01, np.random.default_rng(0))
    assert len(train) >= 12
    assert not (train.order.less & ~truth.less).any()
    assert len(split_training(truth, 0.0, np.random.default_rng(0))) == 0
    small = PartialOrder.total(list(range(40)))
    with caplog.at_level(logging.WARNING):
        assert len(split_training(small, 0.001, np.random.default_rng(0))) == 0
    assert "rounds to no training pairs" in caplog.text
    with pytest.raises(ValueError):
        split_training(truth, 1.0, np.random.default_rng(0))


def test_high_alpha_leaves_a_test_set():
    truth = PartialOrder.total(list(range(20)))
    train = split_training(truth, 0.9, np.random.default_rng(1))
    rest = held_out_order(truth, train)
    assert 0 < rest.comparable_count() < truth.comparable_count()
    d, th = evaluate_run(truth, truth, train)
    assert d == 1.0 and th == 1.0


def test_evaluate_run_conventions():
    truth = PartialOrder.total(list(range(10)))
    train = split_training(truth, 0.3, np.random.default_rng(2))
    # reproducing only the training pairs earns nothing on the held-out pairs
    d, th = evaluate_run(train.order, truth, train)
    assert d == 0.0 and np.isnan(th)
    d_all, th_all = evaluate_run(train.order, truth, train, include_train=True)
    assert d_all == pytest.approx(len(train) / 45) and th_all == 1.0
    empty = PartialOrder.empty(10)
    d, th = evaluate_run(empty, truth)
    assert d == 0.0 and np.isnan(th)
    with pytest.raises(EmptyTestSetError):
        evaluate_run(truth, truth, TrainingPairs.from_order(truth))


def test_ingest_three_nodes(tmp_path):
    edges = tmp_path / "e.txt"
    edges.write_text("7 8\n8 9\n7 8\n")
    times = tmp_path / "t.txt"
    times.write_text("7 1\n8 1\n9 2\n")
    g, clusters, idmap, dropped = ingest_real(edges, times)
    assert dropped == 1 and g.edge_count() == 2
    assert clusters == [[0, 1], [2]]
    assert idmap == {7: 0, 8: 1, 9: 2}
    assert clusters_truth(clusters, 3).comparable_count() == 2


def test_ingest_rejects_missing_and_malformed(tmp_path):
    edges = tmp_path / "e.txt"
    edges.write_text("1 2\n2 3\n")
    times = tmp_path / "t.txt"
    times.write_text("1 5\n2 6\n")
    with pytest.raises(GraphError, match="no timestamp"):
        ingest_real(edges, times)
    edges.write_text("1 2 4\n2 3\n")
    with pytest.raises(GraphError, match="line 2"):
        ingest_real(edges)


def test_ingest_citation_fixture(caplog):
    with caplog.at_level(logging.WARNING):
        g, clusters, idmap, dropped = ingest_real(DATA / "citations.txt")
    assert clusters == [[0, 1, 2], [3, 4], [5, 6], [7, 8], [9]]
    assert idmap == {old: old - 10 for old in range(10, 20)}
    assert dropped == 1 and g.edge_count() == 19
    assert "collapsed 1" in caplog.text


def test_synthetic_instance_scrambles_but_keeps_truth():
    spec = tiny_spec()
    h, truth = synthetic_instance(spec, 0)
    assert len(h) == 12 and h.n0 == 4
    assert truth.comparable_count() == 8 * 7 // 2
    assert not truth.less[:4].any() and not truth.less[:, :4].any()


def test_run_synthetic_deterministic_and_pool_independent(tmp_path):
    a = tiny_spec(output=tmp_path / "a")
    b = tiny_spec(output=tmp_path / "b", workers=2)
    run_synthetic(a)
    run_synthetic(b)
    ta = (tmp_path / "a" / "table.csv").read_bytes()
    assert ta == (tmp_path / "b" / "table.csv").read_bytes()
    run_synthetic(a)
    assert ta == (tmp_path / "a" / "table.csv").read_bytes()
    header = ta.decode().splitlines()[0]
    assert header == "alpha,estimator,density,precision,graphs,undefined,pooled_precision"


def test_alpha_zero_equals_unsupervised():
    sup, _ = run_synthetic(tiny_spec(alphas=[0.0, 0.2]), write=False)
    uns, _ = run_synthetic(tiny_spec(alphas=[0.0]), write=False)
    assert [r.as_list() for r in sup if r.alpha == 0.0] == [r.as_list() for r in uns]


def test_curve_output(tmp_path):
    spec = tiny_spec(n=9, n0=4, graphs=1, alphas=[0.0], epsilons=[0.5, 1.0], output=tmp_path)
    table, curve = run_synthetic(spec)
    assert [c[4] for c in curve] == ["exact-ip", "exact-ip"]
    assert (tmp_path / "curve.csv").exists()


def test_real_mode_on_fixture(tmp_path):
    cfg = tmp_path / "real.toml"
    cfg.write_text(f"""
[experiment]
mode = "real"
seed = 4
output = "{tmp_path / 'out'}"
[model]
n0 = 2
p = 0.6
r = 1.0
[sampler]
tries = 200
[real]
edges = "{DATA / 'citations.txt'}"
[evaluation]
alphas = [0.0]
[[estimator]]
variant = "sort-by-puv-sum"
[[estimator]]
variant = "peel-by-degree"
""")
    spec = load_spec(cfg)
    table, _ = run_experiment(spec)
    assert {r.estimator for r in table} == {"sort-by-puv-sum|C|=1", "peel-by-degree"}
    assert (tmp_path / "out" / "table.csv").exists()


def test_config_loading_and_overrides(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[model]\np = 0.4\n[sampler]\nscheme = "high-prob"\n[[estimator]]\nvariant = "peel-by-degree"\n')
    spec = load_spec(cfg, ["model.p=0.7", "evaluation.alphas=[0.0, 0.5]", "experiment.output=res"])
    assert spec.p == 0.7 and spec.scheme is Scheme.HIGH_PROB
    assert spec.alphas == [0.0, 0.5] and str(spec.output) == "res"
    assert parse_override("a.b.c=1") == {"a": {"b": {"c": 1}}}
    with pytest.raises(ConfigError):
        parse_override("novalue")
    with pytest.raises(ConfigError):
        load_spec(cfg, ["evaluation.alphas=[1.0]"])
    with pytest.raises(ConfigError):
        load_spec(cfg, ["experiment.graphs=0"])
    with pytest.raises(ConfigError):
        load_spec(cfg, ["bogus.key=1"])
    with pytest.raises(ConfigError):
        load_spec(cfg, ['sampler.scheme="magic"'])
    bad = tmp_path / "bad.toml"
    bad.write_text("[model\n")
    with pytest.raises(ConfigError):
        load_spec(bad)


def test_shipped_configs_parse():
    root = Path(__file__).parent.parent / "configs"
    for path in sorted(root.glob("*.toml")):
        spec = load_spec(path)
        assert spec.tries >= 1
    t1 = load_spec(root / "table1_p03.toml")
    assert (t1.n, t1.n0, t1.p0, t1.p, t1.r, t1.tries) == (50, 10, 0.6, 0.3, 1.0, 100000)
    arxiv = load_spec(root / "real_arxiv.toml")
    assert (arxiv.p, arxiv.r) == (0.72, 1.0)


def test_aggregate_per_graph_and_pooled():
    rows = [[(0.0, "x", 10, 4, 4)], [(0.0, "x", 10, 0, 0)], [(0.0, "x", 10, 1, 0)]]
    (row,) = aggregate(rows)
    assert row.density == pytest.approx(5 / 30)
    assert row.precision == pytest.approx(0.5)          # mean of 1.0 and 0.0
    assert row.pooled_precision == pytest.approx(4 / 5)
    assert (row.graphs, row.undefined) == (3, 1)
