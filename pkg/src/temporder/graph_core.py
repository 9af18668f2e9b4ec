"""Undirected simple graphs with stable node ids, relabeling and seed graphs."""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class GraphError(ValueError):
    pass


class Graph:
    """Undirected simple graph keyed by integer node ids.

    Ids ``0 .. n0-1`` are seed nodes. Deleting a node never renumbers the
    others, so ids stay valid across a whole peeling sequence.
    """

    __slots__ = ("adj", "n0")

    def __init__(self, nodes: Iterable[int] | int = 0, edges: Iterable[tuple[int, int]] = (), n0: int = 0):
        if isinstance(nodes, int):
            nodes = range(nodes)
        self.adj: dict[int, set[int]] = {int(v): set() for v in nodes}
        self.n0 = int(n0)
        for u, v in edges:
            self.add_edge(u, v)

    # -- construction -------------------------------------------------
    def add_node(self, v: int) -> None:
        self.adj.setdefault(int(v), set())

    def add_edge(self, u: int, v: int) -> None:
        u, v = int(u), int(v)
        if u == v:
            raise GraphError(f"self-loop on node {u}")
        if u not in self.adj or v not in self.adj:
            raise GraphError(f"edge ({u}, {v}) references an absent node")
        self.adj[u].add(v)
        self.adj[v].add(u)

    def copy(self) -> Graph:
        g = Graph.__new__(Graph)
        g.adj = {v: set(nb) for v, nb in self.adj.items()}
        g.n0 = self.n0
        return g

    # -- queries ------------------------------------------------------
    @property
    def nodes(self) -> list[int]:
        return sorted(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def __contains__(self, v) -> bool:
        return v in self.adj

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj.get(u, ())

    def common_count(self, u: int, v: int) -> int:
        a, b = self.adj[u], self.adj[v]
        if len(a) > len(b):
            a, b = b, a
        return sum(1 for x in a if x in b)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nb in self.adj.items() for v in nb if u < v)

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2

    def is_seed(self, v: int) -> bool:
        return v < self.n0

    def non_seed_nodes(self) -> list[int]:
        return [v for v in self.nodes if v >= self.n0]

    def degree_sequence(self) -> list[int]:
        return sorted(len(nb) for nb in self.adj.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n0 == other.n0 and self.adj == other.adj

    def __repr__(self) -> str:
        return f"Graph(n={len(self)}, m={self.edge_count()}, n0={self.n0})"

    # -- mutation used by peeling -------------------------------------
    def remove_node(self, v: int) -> set[int]:
        """Remove ``v`` in place and return its neighbour set for :meth:`restore_node`."""
        if v not in self.adj:
            raise GraphError(f"node {v} is not present")
        if v < self.n0:
            raise GraphError(f"node {v} is a seed node and cannot be deleted")
        nb = self.adj.pop(v)
        for u in nb:
            self.adj[u].discard(v)
        return nb

    def restore_node(self, v: int, nb: Iterable[int]) -> None:
        self.adj[v] = set(nb)
        for u in self.adj[v]:
            self.adj[u].add(v)

    def to_bitsets(self, size: int | None = None) -> np.ndarray:
        """Adjacency as packed uint64 rows indexed by node id."""
        size = (max(self.adj) + 1 if self.adj else 0) if size is None else size
        words = max(1, (size + 63) // 64)
        bits = np.zeros((size, words), dtype=np.uint64)
        for u, nb in self.adj.items():
            for v in nb:
                bits[u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        return bits


def delete_node(g: Graph, v: int) -> Graph:
    """Return a copy of ``g`` without ``v``; ``g`` itself is untouched."""
    h = g.copy()
    h.remove_node(v)
    return h


def apply_permutation(g: Graph, mapping: Mapping[int, int] | np.ndarray | list[int]) -> Graph:
    """Relabel nodes: edge (u, v) becomes (s(u), s(v)). Seed ids must be fixed."""
    if not isinstance(mapping, Mapping):
        mapping = {i: int(x) for i, x in enumerate(mapping)}
    nodes = set(g.adj)
    if set(mapping) != nodes or set(mapping.values()) != nodes:
        raise GraphError("mapping is not a bijection on the node set")
    for s in range(g.n0):
        if s in mapping and mapping[s] != s:
            raise GraphError(f"mapping moves seed node {s}")
    h = Graph.__new__(Graph)
    h.n0 = g.n0
    h.adj = {mapping[u]: {mapping[v] for v in nb} for u, nb in g.adj.items()}
    return h


def random_seed_fixing_permutation(n: int, n0: int, rng: np.random.Generator) -> np.ndarray:
    perm = np.arange(n)
    perm[n0:] = n0 + rng.permutation(n - n0)
    return perm


def erdos_renyi_seed(n0: int, p0: float, rng: np.random.Generator) -> Graph:
    if not 0.0 <= p0 <= 1.0:
        raise GraphError(f"p0 must lie in [0, 1], got {p0}")
    if n0 < 1:
        raise GraphError("seed graph needs at least one node")
    iu, ju = np.triu_indices(n0, k=1)
    keep = rng.random(iu.size) < p0
    return Graph(n0, zip(iu[keep].tolist(), ju[keep].tolist()), n0=n0)


def complete_graph(n0: int) -> Graph:
    return Graph(n0, ((i, j) for i in range(n0) for j in range(i + 1, n0)), n0=n0)


# -- edge-list I/O -----------------------------------------------------

def parse_edge_lines(lines: Iterable[str], with_time: bool = False):
    """Yield ``(u, v)`` or ``(u, v, t)`` from whitespace-separated lines.

    Comment lines (``#``) and blanks are skipped. Malformed lines raise with
    their 1-based line number.
    """
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#") or s.startswith("%"):
            continue
        parts = s.split()
        need = 3 if with_time else 2
        if len(parts) < need:
            raise GraphError(f"line {lineno}: expected {need} fields, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
            if with_time:
                yield u, v, float(parts[2])
            else:
                yield u, v
        except ValueError as exc:
            raise GraphError(f"line {lineno}: {exc}") from None


_HEADER = re.compile(r"#\s*nodes\s+(\d+)\s+n0\s+(\d+)")


def read_edge_list(path: str | Path, n0: int = 0) -> tuple[Graph, int]:
    """Read an edge list, dropping self-loops and multi-edges.

    Returns the graph and the number of dropped lines. Node ids are kept as
    written, so they should already be dense ``0..n-1``.
    """
    with open(path) as fh:
        lines = fh.readlines()
    pairs = list(parse_edge_lines(lines))
    nodes = {x for e in pairs for x in e}
    # our own writer records isolated nodes and the seed size in a header
    for line in lines[:1]:
        m = _HEADER.match(line)
        if m:
            nodes |= set(range(int(m.group(1))))
            n0 = n0 or int(m.group(2))
    g = Graph(sorted(nodes), n0=n0)
    dropped = 0
    for u, v in pairs:
        if u == v or g.has_edge(u, v):
            dropped += 1
            continue
        g.add_edge(u, v)
    if dropped:
        log.warning("dropped %d self-loop or duplicate edge lines from %s", dropped, path)
    return g, dropped


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {len(g)} n0 {g.n0}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")
