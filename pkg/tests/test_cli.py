import json
import subprocess
import sys

import pytest

from temporder.cli import main
from temporder.partial_order import read_clusters, read_order


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def error_payload(err):
    line = [ln for ln in err.splitlines() if ln.startswith("error: ")][-1]
    return json.loads(line[len("error: "):])


def test_pipeline(tmp_path, capsys):
    g, truth, puv = tmp_path / "g.txt", tmp_path / "truth.txt", tmp_path / "puv.csv"
    code, out, _ = run(["generate", "--n", "12", "--p", "0.4", "--r", "1", "--n0", "3", "--p0", "0.8",
                        "--seed", "2", "--out", str(g), "--truth", str(truth)], capsys)
    assert code == 0 and "nodes=12" in out
    assert len(read_clusters(truth)) == 9
    code, out, _ = run(["estimate-puv", str(g), "--p", "0.4", "--r", "1", "--tries", "500",
                        "--out", str(puv)], capsys)
    assert code == 0 and "paths=500" in out
    order, clusters = tmp_path / "o.txt", tmp_path / "c.txt"
    code, _, _ = run(["order", "--puv", str(puv), "--graph", str(g), "--out", str(order),
                      "--clusters-out", str(clusters)], capsys)
    assert code == 0
    assert read_order(order).comparable_count() == 36
    code, out, _ = run(["eval", "--order", str(order), "--truth", str(truth)], capsys)
    assert code == 0
    header, values = out.strip().splitlines()
    assert header == "density,precision" and values.startswith("1.000000,")
    code, out, _ = run(["curve", "--puv", str(puv), "--n0", "3", "--epsilons", "0.5", "1.0"], capsys)
    assert code == 0 and out.count("lp-bound") == 2


def test_supervised_estimate(tmp_path, capsys):
    g, puv, train = tmp_path / "g.txt", tmp_path / "puv.csv", tmp_path / "train.txt"
    main(["generate", "--n", "9", "--p", "0.4", "--r", "1", "--n0", "3", "--no-scramble", "--out", str(g)])
    train.write_text("4 < 7\n")
    code, _, _ = run(["estimate-puv", str(g), "--p", "0.4", "--r", "1", "--tries", "200",
                      "--train", str(train), "--out", str(puv)], capsys)
    assert code == 0
    row = [ln for ln in puv.read_text().splitlines() if ln.startswith("4,")][0]
    assert float(row.split(",")[8]) == 1.0


def test_greedy_order_from_graph(tmp_path, capsys):
    g = tmp_path / "g.txt"
    main(["generate", "--n", "15", "--p", "0.5", "--r", "1", "--n0", "3", "--out", str(g)])
    code, out, _ = run(["order", "--graph", str(g), "--estimator", "peel-by-degree"], capsys)
    assert code == 0 and "peel-by-degree" in out
    code, _, err = run(["order", "--estimator", "sort-by-degree"], capsys)
    assert code == 1 and error_payload(err)["type"] == "CLIError"


def test_errors_are_machine_readable(tmp_path, capsys):
    code, _, err = run(["estimate-puv", str(tmp_path / "missing.txt"), "--p", "0.4", "--r", "1",
                        "--out", "x.csv"], capsys)
    assert code == 1
    payload = error_payload(err)
    assert payload["command"] == "estimate-puv" and payload["type"] == "FileNotFoundError"
    with pytest.raises(SystemExit) as info:
        main(["order", "--estimator", "bogus"])
    assert info.value.code == 2
    assert error_payload(capsys.readouterr().err)["type"] == "UsageError"


def test_experiment_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "e.toml"
    cfg.write_text('[experiment]\ngraphs = 1\n[model]\nn = 10\nn0 = 3\n[sampler]\ntries = 100\n'
                   '[[estimator]]\nvariant = "sort-by-puv-sum"\n')
    code, out, _ = run(["experiment", str(cfg), "--set", "evaluation.alphas=[0.0, 0.1]",
                        "--output", str(tmp_path / "res")], capsys)
    assert code == 0
    assert len(out.strip().splitlines()) == 3
    assert (tmp_path / "res" / "table.csv").exists()
    code, _, err = run(["experiment", str(cfg), "--set", "model.p=2.0"], capsys)
    assert code == 1 and "p must lie" in error_payload(err)["message"]


def test_degree_check(tmp_path, capsys):
    code, out, _ = run(["degree-check", "--p", "0.75", "--runs", "10", "--n", "120",
                        "--s-values", "25", "50", "--t-values", "60", "120", "--out",
                        str(tmp_path / "rec.csv")], capsys)
    assert code == 0 and out.startswith("p,t_exponent")
    assert (tmp_path / "rec.csv").read_text().startswith("p,s,t,simulated_mean")


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "temporder.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "degree-check" in res.stdout
