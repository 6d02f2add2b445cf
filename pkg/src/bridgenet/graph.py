"""Range-limited connectivity graph over positioned nodes.

Nodes live on the unit square. Two nodes are linked exactly when their
Euclidean distance is <= the communication range (the boundary case
counts as a link). Everything here is derived purely from the node
positions and the range, so rebuilding from the same inputs gives an
identical graph.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

Position = tuple[float, float]


def round9(x: float) -> float:
    """Snap a float to 9 significant digits.

    World coordinates and logged rewards are kept on this grid so that
    trace files written with 9-significant-digit formatting parse back
    to bit-identical values.
    """
    return float(format(x, ".9g"))


def clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


class RangeGraph:
    """Immutable adjacency structure under a communication range.

    Edges are stored as (low id, high id) pairs sorted ascending.
    Connectivity queries run on a union-find built at construction.
    """

    def __init__(self, nodes: Iterable[tuple[int, Position]], comm_range: float):
        if comm_range <= 0:
            raise ValueError(f"comm_range must be positive, got {comm_range}")
        node_list = [(int(i), (float(p[0]), float(p[1]))) for i, p in nodes]
        seen: set[int] = set()
        for i, _ in node_list:
            if i in seen:
                raise ValueError(f"duplicate node id {i}")
            seen.add(i)
        self.nodes: tuple[tuple[int, Position], ...] = tuple(node_list)
        self.comm_range = float(comm_range)
        self._pos = {i: p for i, p in node_list}

        ids = sorted(self._pos)
        edges = []
        adjacency: dict[int, list[int]] = {i: [] for i in ids}
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                u, v = ids[a], ids[b]
                if math.dist(self._pos[u], self._pos[v]) <= self.comm_range:
                    edges.append((u, v))
                    adjacency[u].append(v)
                    adjacency[v].append(u)
        self.edges: tuple[tuple[int, int], ...] = tuple(edges)
        self._adjacency = {i: tuple(sorted(ns)) for i, ns in adjacency.items()}

        # Union-find over node ids, by size with path compression.
        parent = {i: i for i in ids}
        size = {i: 1 for i in ids}

        def find(i: int) -> int:
            root = i
            while parent[root] != root:
                root = parent[root]
            while parent[i] != root:
                parent[i], i = root, parent[i]
            return root

        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                if size[ru] < size[rv]:
                    ru, rv = rv, ru
                parent[rv] = ru
                size[ru] += size[rv]
        self._root = {i: find(i) for i in ids}
        self._component_size = size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RangeGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.comm_range == other.comm_range
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.nodes, self.comm_range, self.edges))

    def position(self, v: int) -> Position:
        self._require(v)
        return self._pos[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._require(v)
        return self._adjacency[v]

    def largest_component_size(self) -> int:
        if not self.nodes:
            raise ValueError("graph has no nodes")
        return max(self._component_size[r] for r in set(self._root.values()))

    def path_exists(self, u: int, v: int) -> bool:
        self._require(u)
        self._require(v)
        return self._root[u] == self._root[v]

    def one_hop_subgraph(
        self, v: int
    ) -> tuple[list[tuple[int, Position]], list[tuple[int, int]]]:
        """Ego node plus its neighbors, with every edge among that set.

        Node order: ego first, remaining ascending by id. Edge order
        follows the graph's (low, high) ascending convention.
        """
        self._require(v)
        members = {v, *self._adjacency[v]}
        node_rows = [(v, self._pos[v])]
        node_rows += [(i, self._pos[i]) for i in sorted(members - {v})]
        edge_rows = [(u, w) for u, w in self.edges if u in members and w in members]
        return node_rows, edge_rows

    def _require(self, v: int) -> None:
        if v not in self._pos:
            raise ValueError(f"unknown node id {v}")


def build_edges(nodes: Sequence[tuple[int, Position]], comm_range: float) -> RangeGraph:
    """Construct the range graph for the given positioned nodes."""
    return RangeGraph(nodes, comm_range)
