"""Expected-degree recursions for duplication-divergence graphs and simulation fits.

For p > 1/2 the mean degree at time t of the node born at time s scales as
(t/s)^p * s^(2p-1); all checks here are exponent fits, never constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dd_model import DDParams, grow_matrix
from .graph_core import Graph, complete_graph


@dataclass
class DegreeForecast:
    s: int
    t: int
    params: DDParams
    expected_degree: float


def expected_degree_recursion(s: int, t: int, p: float, r: float, initial: float) -> float:
    """E[deg_t(s)] from E[deg_s(s)] = ``initial`` by iterating d -> d(1 + p/k - r/k^2) + r/k."""
    if t < s:
        raise ValueError("need t >= s")
    if initial < 0:
        raise ValueError("initial degree must be non-negative")
    d = float(initial)
    for k in range(s, t):
        d = d * (1.0 + p / k - r / (k * k)) + r / k
    return d


def arrival_degree_mean(t: int, p: float, r: float, mean_edges: float) -> float:
    """E[deg_{t+1}(t+1)] = (p - r/t) * 2 E(G_t) / t + r."""
    return (p - r / t) * 2.0 * mean_edges / t + r


@dataclass
class Simulation:
    """Mean degree table ``deg[s_index, t_index]`` and mean edge counts per size."""
    s_values: np.ndarray
    t_values: np.ndarray
    mean_degree: np.ndarray
    mean_edges: np.ndarray      # indexed by size k = 0..n (E(G_k)); zeros below n0
    sem_degree: np.ndarray
    runs: int


def simulate_degrees(params: DDParams, s_values, t_values, runs: int,
                     rng: np.random.Generator, seed_graph: Graph | None = None) -> Simulation:
    """Average deg_t(s) and E(G_t) over ``runs`` independent graphs."""
    seed_graph = complete_graph(params.n0) if seed_graph is None else seed_graph
    s_values = np.asarray(s_values, dtype=int)
    t_values = np.asarray(t_values, dtype=int)
    acc = np.zeros((len(s_values), len(t_values)))
    acc2 = np.zeros_like(acc)
    edges = np.zeros(params.n + 1)
    for _ in range(runs):
        adj = grow_matrix(params, seed_graph, rng)
        # cum[v, t] = degree of v within the first t nodes
        cum = np.cumsum(adj, axis=1, dtype=np.int32)
        d = cum[np.ix_(s_values - 1, t_values - 1)].astype(float)
        # node born at time s has id s-1; only counts for t >= s
        acc += d
        acc2 += d * d
        per_node_new = np.triu(adj, 1).sum(axis=0)   # edges from node k to older nodes
        edges[1:] += np.cumsum(per_node_new)
    mean = acc / runs
    var = np.maximum(acc2 / runs - mean**2, 0.0)
    sem = np.sqrt(var / max(runs - 1, 1))
    return Simulation(s_values, t_values, mean, edges / runs, sem, runs)


@dataclass
class ScalingReport:
    t_exponent: float
    s_exponent: float
    intercept: float
    residual_rms: float
    edge_slope: float
    p: float

    def row(self) -> dict:
        return {"p": self.p, "t_exponent": self.t_exponent, "s_exponent": self.s_exponent,
                "edge_slope": self.edge_slope, "residual_rms": self.residual_rms}


def fit_scaling(sim: Simulation, p: float, edge_from: int | None = None) -> ScalingReport:
    """Least squares of log E deg_t(s) on log(t/s) and log s, plus the E(G_t) slope."""
    rows, ys = [], []
    for i, s in enumerate(sim.s_values):
        for j, t in enumerate(sim.t_values):
            if t > s and sim.mean_degree[i, j] > 0:
                rows.append([math.log(t / s), math.log(s), 1.0])
                ys.append(math.log(sim.mean_degree[i, j]))
    X, y = np.array(rows), np.array(ys)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    n = len(sim.mean_edges) - 1
    lo = edge_from if edge_from is not None else max(n // 10, 2)
    ks = np.arange(lo, n + 1)
    slope = np.polyfit(np.log(ks), np.log(sim.mean_edges[ks]), 1)[0]
    return ScalingReport(float(coef[0]), float(coef[1]), float(coef[2]),
                         float(np.sqrt(np.mean(resid**2))), float(slope), p)


def scaling_check(params: DDParams, s_values, t_values, runs: int,
                  rng: np.random.Generator, seed_graph: Graph | None = None) -> ScalingReport:
    if params.p <= 0.5:
        raise ValueError("the scaling law holds for p > 0.5 only")
    sim = simulate_degrees(params, s_values, t_values, runs, rng, seed_graph)
    return fit_scaling(sim, params.p)


def recursion_table(sim: Simulation, params: DDParams) -> list[dict]:
    """Rows ``s,t,simulated_mean,recursion_value,ratio`` with E[deg_s(s)] from the arrival identity."""
    out = []
    for i, s in enumerate(sim.s_values):
        init = arrival_degree_mean(s - 1, params.p, params.r, sim.mean_edges[s - 1])
        for j, t in enumerate(sim.t_values):
            if t < s:
                continue
            rec = expected_degree_recursion(int(s), int(t), params.p, params.r, init)
            simv = sim.mean_degree[i, j]
            out.append({"s": int(s), "t": int(t), "simulated_mean": simv,
                        "recursion_value": rec, "ratio": simv / rec if rec else math.nan})
    return out
