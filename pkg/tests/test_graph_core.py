import numpy as np
import pytest
from hypothesis import given, strategies as st

from temporder.graph_core import (Graph, GraphError, apply_permutation, complete_graph, delete_node,
                                  erdos_renyi_seed, parse_edge_lines, random_seed_fixing_permutation,
                                  read_edge_list, write_edge_list)

from conftest import small_dd


def test_basic_queries():
    g = Graph(4, [(0, 1), (1, 2), (1, 3)], n0=1)
    assert g.degree(1) == 3
    assert g.common_count(0, 2) == 1
    assert g.edge_count() == 3
    assert g.non_seed_nodes() == [1, 2, 3]
    assert g.is_seed(0) and not g.is_seed(1)
    assert g.degree_sequence() == [1, 1, 1, 3]


def test_rejects_self_loop_and_unknown_node():
    g = Graph(3)
    with pytest.raises(GraphError):
        g.add_edge(1, 1)
    with pytest.raises(GraphError):
        g.add_edge(0, 7)


def test_remove_and_restore_roundtrip():
    g = small_dd(3)
    before = g.copy()
    v = g.non_seed_nodes()[-1]
    nb = g.remove_node(v)
    assert v not in g and all(v not in g.neighbors(u) for u in g.nodes)
    g.restore_node(v, nb)
    assert g == before


def test_remove_seed_or_absent_refused():
    g = complete_graph(3)
    with pytest.raises(GraphError):
        g.remove_node(0)
    with pytest.raises(GraphError):
        g.remove_node(9)


def test_delete_node_leaves_original():
    g = small_dd(4)
    h = delete_node(g, g.non_seed_nodes()[0])
    assert len(h) == len(g) - 1
    assert len(small_dd(4)) == len(g)


def test_bitsets_match_adjacency():
    g = small_dd(5, n=70, n0=5)
    bits = g.to_bitsets()
    assert bits.shape == (70, 2)
    for u in g.nodes:
        got = {w * 64 + b for w in range(2) for b in range(64) if int(bits[u, w]) >> b & 1}
        assert got == g.neighbors(u)


def test_permutation_must_fix_seed():
    g = complete_graph(3)
    g.add_node(3)
    g.n0 = 2
    with pytest.raises(GraphError):
        apply_permutation(g, [1, 0, 2, 3])
    with pytest.raises(GraphError):
        apply_permutation(g, [0, 1, 2, 2])


@given(st.integers(0, 2**32 - 1))
def test_permutation_preserves_structure(seed):
    rng = np.random.default_rng(seed)
    g = small_dd(seed % 1000, n=9, n0=3)
    perm = random_seed_fixing_permutation(9, 3, rng)
    assert list(perm[:3]) == [0, 1, 2]
    h = apply_permutation(g, perm)
    assert sorted(h.degree_sequence()) == sorted(g.degree_sequence())
    for u, v in g.edges():
        assert h.has_edge(int(perm[u]), int(perm[v]))
    inv = np.argsort(perm)
    assert apply_permutation(h, inv) == g


def test_er_seed_extremes():
    rng = np.random.default_rng(0)
    assert erdos_renyi_seed(5, 1.0, rng).edge_count() == 10
    assert erdos_renyi_seed(5, 0.0, rng).edge_count() == 0
    with pytest.raises(GraphError):
        erdos_renyi_seed(5, 1.5, rng)


def test_parse_reports_line_numbers():
    lines = ["# comment", "0 1", "", "2 x"]
    with pytest.raises(GraphError, match="line 4"):
        list(parse_edge_lines(lines))
    with pytest.raises(GraphError, match="line 2"):
        list(parse_edge_lines(["# c", "0 1"], with_time=True))
    assert list(parse_edge_lines(["0 1 3.5"], with_time=True)) == [(0, 1, 3.5)]


def test_edge_list_roundtrip_keeps_isolated_nodes(tmp_path):
    g = Graph(6, [(0, 1), (2, 3)], n0=2)
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    h, dropped = read_edge_list(path)
    assert dropped == 0 and h == g and h.n0 == 2


def test_read_drops_duplicates_and_loops(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("0 1\n1 0\n2 2\n1 2\n")
    g, dropped = read_edge_list(path)
    assert dropped == 2 and g.edge_count() == 2
