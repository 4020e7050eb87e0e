"""Undirected communication graphs over nodes ``0 .. m-1``."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np


class GraphGenerationError(RuntimeError):
    """Raised when a connected random graph could not be drawn."""


def _normalize_edges(node_count: int, edges: Iterable[tuple[int, int]]) -> frozenset:
    out = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise ValueError(f"edge ({i}, {j}) out of range for {node_count} nodes")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph.

    Edges are stored as ordered pairs ``(i, j)`` with ``i < j``.
    """

    node_count: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        object.__setattr__(self, "edges", _normalize_edges(self.node_count, self.edges))
        adj = [set() for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    def neighbors(self, i: int) -> frozenset:
        if not 0 <= i < self.node_count:
            raise IndexError(f"node {i} out of range for {self.node_count} nodes")
        return self._adj[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=int)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.node_count, self.node_count))
        for i, j in self.edges:
            A[i, j] = A[j, i] = 1.0
        return A

    def is_connected(self) -> bool:
        return is_connected(self)

    def __repr__(self):
        return f"Graph(node_count={self.node_count}, edges={len(self.edges)})"


def neighbors(g: Graph, i: int) -> frozenset:
    """Set of nodes sharing an edge with ``i``."""
    return g.neighbors(i)


def is_connected(g: Graph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in g.neighbors(i):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == g.node_count


def erdos_renyi(m: int, p_edge: float, seed=None, max_retries: int = 1000) -> Graph:
    """Draw a connected G(m, p) random graph.

    Every unordered pair is included independently with probability
    `p_edge`. Disconnected draws are discarded and the same generator is
    sampled again, so the result is a deterministic function of
    ``(m, p_edge, seed)``.

    Parameters
    ----------
    m : int
        Number of nodes, at least 2.
    p_edge : float
        Edge probability in ``(0, 1]``.
    seed : int or numpy.random.Generator, optional
    max_retries : int
        Number of draws before giving up.

    Raises
    ------
    GraphGenerationError
        If no connected graph was drawn within `max_retries` attempts.
    """
    if m < 2:
        raise ValueError("erdos_renyi needs at least 2 nodes")
    if not 0.0 < p_edge <= 1.0:
        raise ValueError("p_edge must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(m, k=1)
    for _ in range(max_retries):
        keep = rng.random(iu.size) < p_edge
        g = Graph(m, zip(iu[keep].tolist(), ju[keep].tolist()))
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"no connected graph with m={m}, p_edge={p_edge} after {max_retries} draws"
    )


def path_graph(m: int) -> Graph:
    return Graph(m, [(i, i + 1) for i in range(m - 1)])


def cycle_graph(m: int) -> Graph:
    if m < 3:
        return path_graph(m)
    return Graph(m, [(i, (i + 1) % m) for i in range(m)])


def complete_graph(m: int) -> Graph:
    return Graph(m, [(i, j) for i in range(m) for j in range(i + 1, m)])


def read_edge_list(path, node_count: int | None = None) -> Graph:
    """Load a graph from text with one ``i j`` pair per line.

    Blank lines and ``#`` comments are skipped. Without `node_count` the
    graph spans ``0 .. max index``.
    """
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        i, j = line.split()
        edges.append((int(i), int(j)))
    if node_count is None:
        node_count = 1 + max((max(e) for e in edges), default=0)
    return Graph(node_count, edges)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"{i} {j}" for i, j in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
