import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from temporder.exact import exact_puv
from temporder.optimizer import (LABELED_POSET_COUNTS, LPIterationLimit, PrecisionProgram,
                                 best_total_order, check_constraints, labeled_posets,
                                 lemma1_bound_check, optimal_curve, perturb, solve_ip_bruteforce,
                                 solve_lp, write_curve)
from temporder.partial_order import PartialOrder, transitive_close

from conftest import small_dd


def random_puv(n, rng):
    vals = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    x = rng.random(iu.size)
    vals[iu, ju], vals[ju, iu] = x, 1 - x
    return vals


@pytest.mark.parametrize("n", range(6))
def test_poset_counts_and_validity(n):
    posets = labeled_posets(n)
    assert len(posets) == LABELED_POSET_COUNTS[n]
    keys = {p.tobytes() for p in posets}
    assert len(keys) == len(posets)
    if n <= 4:
        for p in posets:
            assert check_constraints(p, 0)
            assert np.array_equal(transitive_close(PartialOrder(p)).less, p)


def test_poset_brute_force_n3():
    """Every 0/1 relation on 3 nodes that passes the checker is listed."""
    found = set()
    cells = [(u, v) for u in range(3) for v in range(3) if u != v]
    for bits in range(1 << len(cells)):
        x = np.zeros((3, 3), dtype=int)
        for i, (u, v) in enumerate(cells):
            x[u, v] = bits >> i & 1
        if check_constraints(x, 0):
            found.add(x.astype(bool).tobytes())
    assert found == {p.tobytes() for p in labeled_posets(3)}


@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_ip_total_order_matches_permutation_search(seed, n):
    vals = random_puv(n, np.random.default_rng(seed))
    order, obj = solve_ip_bruteforce(PrecisionProgram(vals, 1.0))
    _, best = best_total_order(vals)
    assert obj == pytest.approx(best, abs=1e-12)
    assert order.comparable_count() == n * (n - 1) // 2


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.2, 0.4, 0.6, 0.8, 1.0]))
def test_ip_solution_is_feasible_and_lp_dominates(seed, eps):
    vals = random_puv(5, np.random.default_rng(seed))
    prog = PrecisionProgram(vals, eps)
    po, obj = solve_ip_bruteforce(prog)
    assert check_constraints(po.less, prog.min_pairs)
    y, lp = solve_lp(prog)
    assert lp >= obj - 1e-6
    # the relaxed point satisfies its own constraints
    s = 1 / (eps * prog.pair_count)
    tol = 1e-6
    assert abs(y.sum() - 1) < tol and (y >= -tol).all() and (y <= s + tol).all()
    for u, v, w in itertools.permutations(range(5), 3):
        assert y[u, v] + y[v, w] - y[u, w] <= s + tol
        assert y[u, v] + y[v, u] <= s + tol


def test_ip_prefers_confident_pairs_at_low_density():
    vals = np.array([[0, 0.99, 0.5], [0.01, 0, 0.5], [0.5, 0.5, 0]])
    po, obj = solve_ip_bruteforce(PrecisionProgram(vals, 1 / 3))
    assert po.pairs() == [(0, 1)] and obj == pytest.approx(0.99)


def test_program_validation():
    with pytest.raises(ValueError):
        PrecisionProgram(np.zeros((3, 3)), 0.0)
    with pytest.raises(ValueError):
        PrecisionProgram(np.zeros((3, 3)), 0.2)   # below one pair
    assert PrecisionProgram(np.zeros((5, 5)), 0.2).min_pairs == 2
    with pytest.raises(ValueError):
        solve_ip_bruteforce(PrecisionProgram(np.zeros((7, 7)), 1.0))
    with pytest.raises(ValueError):
        solve_lp(PrecisionProgram(np.zeros((7, 7)), 1.0), max_nodes=6)


def test_lp_iteration_cap():
    vals = random_puv(8, np.random.default_rng(1))
    with pytest.raises(LPIterationLimit):
        solve_lp(PrecisionProgram(vals, 0.5), max_iter=1)


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.3))
def test_perturb_keeps_complements_and_bound(seed, lam):
    rng = np.random.default_rng(seed)
    vals = random_puv(5, rng)
    noisy = perturb(vals, lam, rng)
    iu, ju = np.triu_indices(5, 1)
    assert np.allclose(noisy[iu, ju] + noisy[ju, iu], 1)
    assert np.abs(noisy - vals).max() <= lam + 1e-12
    assert ((noisy >= 0) & (noisy <= 1)).all()


def test_lemma_bound_small():
    h = small_dd(2, n=8, n0=3)
    m = exact_puv(h, 0.4, 1.0)
    rep = lemma1_bound_check(m, 0.05, 10, 0.6, np.random.default_rng(0), h.non_seed_nodes())
    assert rep.ok and rep.max_gap <= 0.15


def test_curve_kinds_and_csv(tmp_path):
    rng = np.random.default_rng(3)
    small = random_puv(4, rng)
    pts = optimal_curve(small, [0.5, 1.0])
    assert [p.kind for p in pts] == ["exact-ip", "exact-ip"]
    assert pts[0].precision >= pts[1].precision - 1e-12
    big = random_puv(8, rng)
    pts = optimal_curve(big, [0.5, 1.0])
    assert all(p.kind == "lp-bound" for p in pts)
    write_curve(pts, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "epsilon,density,precision,kind" and len(lines) == 3
