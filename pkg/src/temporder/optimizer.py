"""Precision-maximising partial orders under a minimum-density constraint.

The integer program is solved by brute force over all labelled posets
(n <= 6); the linear relaxation goes through scipy's HiGHS solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .partial_order import PartialOrder
from .puv import PuvMatrix

MAX_IP_NODES = 6
MAX_LP_NODES = 60
LABELED_POSET_COUNTS = (1, 1, 3, 19, 219, 4231, 130023)


class Infeasible(ValueError):
    pass


class LPIterationLimit(RuntimeError):
    def __init__(self, best_bound: float | None):
        self.best_bound = best_bound
        super().__init__(f"LP iteration cap reached; best bound so far {best_bound}")


@dataclass
class PrecisionProgram:
    puv: np.ndarray          # dense n x n, already restricted to the nodes of interest
    epsilon: float

    def __post_init__(self):
        self.puv = np.asarray(self.puv, dtype=float)
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.epsilon * self.pair_count < 1 - 1e-12:
            raise ValueError("epsilon * C(n, 2) must be at least 1")

    @classmethod
    def from_matrix(cls, m: PuvMatrix, epsilon: float, nodes=None) -> PrecisionProgram:
        vals = m.values if nodes is None else m.values[np.ix_(list(nodes), list(nodes))]
        return cls(vals, epsilon)

    @property
    def n(self) -> int:
        return self.puv.shape[0]

    @property
    def pair_count(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def min_pairs(self) -> int:
        return math.ceil(self.epsilon * self.pair_count - 1e-9)


@dataclass
class CurvePoint:
    epsilon: float
    density: float
    precision: float
    kind: str   # "exact-ip" or "lp-bound"


# -- labelled poset enumeration ----------------------------------------

@lru_cache(maxsize=None)
def labeled_posets(n: int) -> np.ndarray:
    """All strict partial orders on ``n`` labelled elements as (count, n, n) bool.

    Built by inserting element k into every poset on 0..k-1: its down-set must
    be an order ideal, its up-set an order filter, and everything below it must
    already lie below everything above it.
    """
    if n > MAX_IP_NODES:
        raise ValueError(f"poset enumeration is limited to n <= {MAX_IP_NODES}")
    # a poset on k elements: tuple of down-masks, down[i] = set of j < i (as bits)
    current = [()]
    for k in range(n):
        nxt = []
        for down in current:
            up = [0] * k
            for i in range(k):
                d = down[i]
                j = 0
                while d:
                    if d & 1:
                        up[j] |= 1 << i
                    d >>= 1
                    j += 1
            ideals = [s for s in range(1 << k) if all(not (s >> i & 1) or (down[i] & ~s) == 0 for i in range(k))]
            filters = set(s for s in range(1 << k) if all(not (s >> i & 1) or (up[i] & ~s) == 0 for i in range(k)))
            full = (1 << k) - 1
            for D in ideals:
                allowed = full & ~D
                for i in range(k):
                    if D >> i & 1:
                        allowed &= up[i]
                # enumerate filters inside `allowed`
                sub = allowed
                while True:
                    if sub in filters:
                        new = list(down)
                        for i in range(k):
                            if sub >> i & 1:
                                new[i] |= 1 << k
                        new.append(D)
                        nxt.append(tuple(new))
                    if sub == 0:
                        break
                    sub = (sub - 1) & allowed
        current = nxt
    out = np.zeros((len(current), n, n), dtype=bool)
    for idx, down in enumerate(current):
        for i, d in enumerate(down):
            for j in range(n):
                if d >> j & 1:
                    out[idx, j, i] = True   # j below i  ->  j older than i
    return out


def check_constraints(x: np.ndarray, min_pairs: int) -> bool:
    """Independent feasibility check of an IP point (0/1 matrix)."""
    x = np.asarray(x, dtype=int)
    n = x.shape[0]
    if x.diagonal().any() or not np.isin(x, (0, 1)).all():
        return False
    if x.sum() < min_pairs:
        return False
    for u in range(n):
        for v in range(n):
            if u != v and x[u, v] + x[v, u] > 1:
                return False
            for w in range(n):
                if len({u, v, w}) == 3 and x[u, w] < x[u, v] + x[v, w] - 1:
                    return False
    return True


def _ip_scores(puv: np.ndarray, posets: np.ndarray):
    flat = posets.reshape(len(posets), -1)
    k = flat.sum(axis=1)
    s = flat.astype(float) @ puv.reshape(-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        obj = np.where(k > 0, s / np.maximum(k, 1), -np.inf)
    return obj, k


def solve_ip_bruteforce(prog: PrecisionProgram) -> tuple[PartialOrder, float]:
    """Exact optimum of sum p_uv x_uv / sum x_uv over all posets meeting the density floor.

    Ties go to the larger relation, then to the lexicographically smallest
    sorted pair list.
    """
    if prog.n > MAX_IP_NODES:
        raise ValueError(f"brute-force IP is limited to n <= {MAX_IP_NODES}")
    posets = labeled_posets(prog.n)
    obj, k = _ip_scores(prog.puv, posets)
    feasible = k >= prog.min_pairs
    if not feasible.any():
        raise Infeasible(f"no partial order on {prog.n} nodes has {prog.min_pairs} comparable pairs")
    obj = np.where(feasible, obj, -np.inf)
    best = obj.max()
    ties = np.flatnonzero(obj >= best - 1e-12)
    if len(ties) > 1:
        kmax = k[ties].max()
        ties = ties[k[ties] == kmax]
        ties = sorted(ties, key=lambda i: sorted(zip(*np.nonzero(posets[i]))))
    pick = int(ties[0])
    return PartialOrder(posets[pick].copy()), float(obj[pick])


def best_total_order(puv: np.ndarray) -> tuple[list[int], float]:
    """Exhaustive search over all n! linear orders (oracle for epsilon = 1)."""
    n = puv.shape[0]
    best, arg = -math.inf, None
    for perm in permutations(range(n)):
        s = sum(puv[perm[i], perm[j]] for i in range(n) for j in range(i + 1, n))
        if s > best + 1e-12:
            best, arg = s, list(perm)
    return arg, best / (n * (n - 1) / 2)


# -- linear relaxation -------------------------------------------------

def _lp_system(n: int, s: float):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    col = {e: i for i, e in enumerate(pairs)}
    rows, cols, vals = [], [], []
    r = 0
    for u in range(n):
        for v in range(u + 1, n):
            rows += [r, r]
            cols += [col[u, v], col[v, u]]
            vals += [1.0, 1.0]
            r += 1
    for u in range(n):
        for v in range(n):
            if v == u:
                continue
            for w in range(n):
                if w == u or w == v:
                    continue
                rows += [r, r, r]
                cols += [col[u, v], col[v, w], col[u, w]]
                vals += [1.0, 1.0, -1.0]
                r += 1
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(r, len(pairs)))
    b = np.full(r, s)
    return pairs, A, b


def solve_lp(prog: PrecisionProgram, max_nodes: int = MAX_LP_NODES, max_iter: int | None = None):
    """Maximise sum p_uv y_uv over the relaxed polytope.

    Returns ``(y, objective)`` with ``y`` as an n x n matrix. The optimum
    upper-bounds the IP objective because x / K is feasible for any
    feasible poset x with K comparable pairs.
    """
    n = prog.n
    if n > max_nodes:
        raise ValueError(f"LP is capped at n <= {max_nodes} nodes (O(n^3) constraints)")
    if n < 2:
        raise Infeasible("need at least two nodes")
    s = 1.0 / (prog.epsilon * prog.pair_count)
    pairs, A, b = _lp_system(n, s)
    c = -np.array([prog.puv[u, v] for u, v in pairs])
    options = {"primal_feasibility_tolerance": 1e-7, "dual_feasibility_tolerance": 1e-7}
    if max_iter is not None:
        options["maxiter"] = max_iter
    res = linprog(c, A_ub=A, b_ub=b, A_eq=np.ones((1, len(pairs))), b_eq=[1.0],
                  bounds=(0, s), method="highs", options=options)
    if res.status == 1:
        raise LPIterationLimit(None if res.fun is None else -res.fun)
    if res.status != 0:
        raise Infeasible(res.message)
    y = np.zeros((n, n))
    for (u, v), val in zip(pairs, res.x):
        y[u, v] = val
    return y, float(-res.fun)


def optimal_curve(m: PuvMatrix | np.ndarray, epsilons, nodes=None) -> list[CurvePoint]:
    """Exact IP curve for tiny node sets, LP upper bound otherwise."""
    vals = m.values if isinstance(m, PuvMatrix) else np.asarray(m)
    if nodes is not None:
        idx = list(nodes)
        vals = vals[np.ix_(idx, idx)]
    out = []
    for eps in epsilons:
        prog = PrecisionProgram(vals, float(eps))
        if prog.n <= MAX_IP_NODES:
            order, obj = solve_ip_bruteforce(prog)
            out.append(CurvePoint(float(eps), order.comparable_count() / prog.pair_count, obj, "exact-ip"))
        else:
            _, obj = solve_lp(prog)
            out.append(CurvePoint(float(eps), float(eps), obj, "lp-bound"))
    return out


def write_curve(points: list[CurvePoint], path) -> None:
    with open(path, "w") as fh:
        fh.write("epsilon,density,precision,kind\n")
        for pt in points:
            fh.write(f"{pt.epsilon:.6g},{pt.density:.6g},{pt.precision:.6g},{pt.kind}\n")


# -- perturbation bound ------------------------------------------------

@dataclass
class BoundReport:
    lam: float
    trials: int
    max_gap: float
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def perturb(puv: np.ndarray, lam: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform noise in [-lam, lam] on the upper triangle, clamped, complement kept."""
    n = puv.shape[0]
    out = puv.copy()
    iu, ju = np.triu_indices(n, 1)
    noisy = np.clip(puv[iu, ju] + rng.uniform(-lam, lam, iu.size), 0.0, 1.0)
    out[iu, ju] = noisy
    out[ju, iu] = 1.0 - noisy
    return out


def lemma1_bound_check(m: PuvMatrix | np.ndarray, lam: float, trials: int, epsilon: float = 1.0,
                       rng: np.random.Generator | None = None, nodes=None) -> BoundReport:
    """Perturb p_uv by at most ``lam`` and compare both IP optima against 3 * lam."""
    rng = np.random.default_rng(0) if rng is None else rng
    vals = m.values if isinstance(m, PuvMatrix) else np.asarray(m, dtype=float)
    if nodes is not None:
        vals = vals[np.ix_(list(nodes), list(nodes))]
    if vals.shape[0] > MAX_IP_NODES:
        raise ValueError(f"bound check needs the exact IP (n <= {MAX_IP_NODES})")
    _, j_true = solve_ip_bruteforce(PrecisionProgram(vals, epsilon))
    worst, bad = 0.0, []
    for _ in range(trials):
        noisy = perturb(vals, lam, rng)
        _, j_hat = solve_ip_bruteforce(PrecisionProgram(noisy, epsilon))
        gap = abs(j_hat - j_true)
        worst = max(worst, gap)
        if gap > 3 * lam + 1e-12:
            bad.append({"gap": gap, "puv_hat": noisy})
    return BoundReport(lam, trials, worst, bad)
