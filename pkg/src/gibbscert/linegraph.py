"""Line graph of a hypergraph, with the path metric, balls and spheres.

The line graph has the hyperedges as nodes; two nodes are adjacent when the
corresponding edges share at least one vertex.  Distances are shortest-path
lengths computed by breadth-first search, cached per source node.  Nodes in
different components are at INFINITE_DISTANCE, a dedicated sentinel that is
never a large finite number.
"""

from __future__ import annotations

import csv
import io
import json
import math
import threading
from collections import deque
from typing import Iterable, Mapping

from .hypergraph import Hypergraph, VertexId, edge_neighborhood, span

INFINITE_DISTANCE = math.inf


class LineGraph:
    """Simple undirected graph on edge ids with cached BFS distances."""

    __slots__ = ("adjacency", "source", "_cache", "_lock")

    def __init__(self, adjacency: Mapping[int, Iterable[int]], source: Hypergraph | None = None):
        adj = {node: tuple(sorted(set(nbrs))) for node, nbrs in adjacency.items()}
        for node, nbrs in adj.items():
            if node in nbrs:
                raise ValueError(f"node {node} is adjacent to itself")
            for other in nbrs:
                if other not in adj or node not in adj[other]:
                    raise ValueError(f"adjacency is not symmetric at pair ({node}, {other})")
        self.adjacency: dict[int, tuple[int, ...]] = adj
        self.source = source
        self._cache: dict[int, dict[int, int]] = {}
        self._lock = threading.Lock()

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.adjacency))

    def __len__(self) -> int:
        return len(self.adjacency)

    def degree(self, node: int) -> int:
        return len(self._require(node))

    def degrees(self) -> dict[int, int]:
        return {node: len(nbrs) for node, nbrs in self.adjacency.items()}

    def _require(self, node: int) -> tuple[int, ...]:
        try:
            return self.adjacency[node]
        except KeyError:
            raise KeyError(f"unknown line-graph node {node}") from None

    def distances_from(self, node: int) -> dict[int, int]:
        """All finite distances from a node; absent keys are unreachable."""
        self._require(node)
        with self._lock:
            hit = self._cache.get(node)
        if hit is not None:
            return hit
        dist = {node: 0}
        queue = deque([node])
        while queue:
            cur = queue.popleft()
            for nxt in self.adjacency[cur]:
                if nxt not in dist:
                    dist[nxt] = dist[cur] + 1
                    queue.append(nxt)
        with self._lock:
            self._cache[node] = dist
        return dist


def build_line_graph(hg: Hypergraph) -> LineGraph:
    """Line graph of a hypergraph: edges become nodes, adjacency is intersection."""
    adjacency: dict[int, set[int]] = {e.id: set() for e in hg.edges}
    for x in hg.vertices:
        incident = sorted(edge_neighborhood(hg, x))
        # quadratic in the vertex degree, which is small in all generated models
        for i, a in enumerate(incident):
            for b in incident[i + 1 :]:
                adjacency[a].add(b)
                adjacency[b].add(a)
    return LineGraph(adjacency, source=hg)


def dist(lg: LineGraph, e: int, other: int) -> float:
    """Shortest-path distance; INFINITE_DISTANCE when disconnected."""
    lg._require(other)
    d = lg.distances_from(e)
    return d.get(other, INFINITE_DISTANCE)


def ball(lg: LineGraph, e: int, radius: int) -> frozenset[int]:
    """Nodes at distance <= radius from e (always contains e itself)."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = lg.distances_from(e)
    return frozenset(node for node, dd in d.items() if dd <= radius)


def sphere(lg: LineGraph, e: int, radius: int) -> frozenset[int]:
    """Nodes at distance exactly radius from e."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = lg.distances_from(e)
    return frozenset(node for node, dd in d.items() if dd == radius)


def volume_of_ball(
    hg: Hypergraph, lg: LineGraph, x: VertexId, e_x: int, radius: int
) -> tuple[frozenset[VertexId], frozenset[VertexId]]:
    """Vertex volume spanned by a line-graph ball around an anchor edge of x.

    Args:
        hg: source hypergraph.
        lg: its line graph.
        x: anchor vertex; must belong to the edge e_x.
        e_x: id of an edge containing x.
        radius: ball radius in the line-graph metric.

    Returns:
        (volume, outer rim): the union of the vertex sets of all edges in the
        ball, and the vertices added by the sphere of radius+1 that are not
        already in the volume.
    """
    if x not in hg.edge(e_x).vertices:
        raise ValueError(f"vertex {x} does not lie in edge {e_x}")
    volume = span(hg, ball(lg, e_x, radius))
    rim = span(hg, sphere(lg, e_x, radius + 1)) - volume
    return volume, frozenset(rim)


def adjacency_json(lg: LineGraph) -> str:
    """Adjacency-list JSON keyed by node id, deterministically ordered."""
    data = {str(node): list(lg.adjacency[node]) for node in lg.nodes}
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def edge_list_csv(lg: LineGraph) -> str:
    """Undirected edge list as CSV with a header row, one row per pair a < b."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["node_a", "node_b"])
    for node in lg.nodes:
        for other in lg.adjacency[node]:
            if node < other:
                writer.writerow([node, other])
    return buf.getvalue()
