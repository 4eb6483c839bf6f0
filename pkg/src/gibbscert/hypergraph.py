"""Finite hypergraphs with incidence, boundary and span queries.

A hypergraph is a vertex set together with a family of hyperedges, each a
set of at least two distinct vertices.  Vertices are plain integers.  Edges
receive dense integer ids in construction order, which keeps incidence
lookups O(1) and serialization deterministic.  Instances are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

VertexId = int


@dataclass(frozen=True)
class Hyperedge:
    """One hyperedge: a dense integer id plus a sorted tuple of vertices."""

    id: int
    vertices: tuple[VertexId, ...]

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError(
                f"edge {self.id} has {len(self.vertices)} vertex/vertices; "
                "singleton and empty edges are not allowed"
            )
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"edge {self.id} lists a vertex twice")
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, x: object) -> bool:
        return x in self.vertices

    def __iter__(self) -> Iterator[VertexId]:
        return iter(self.vertices)

    @property
    def vertex_set(self) -> frozenset[VertexId]:
        return frozenset(self.vertices)


class Hypergraph:
    """Immutable finite hypergraph with an incidence index.

    Args:
        edges: iterable of vertex collections, one per hyperedge.  Edge ids
            are assigned in iteration order starting at 0.  The vertex set is
            the union of all edges, so no vertex is isolated.

    Raises:
        ValueError: on singleton edges, repeated vertices within an edge, or
            two edges with identical vertex sets.
    """

    __slots__ = ("_edges", "_incidence", "_vertices")

    def __init__(self, edges: Iterable[Iterable[VertexId]]):
        built: list[Hyperedge] = []
        seen: set[frozenset[VertexId]] = set()
        incidence: dict[VertexId, list[int]] = {}
        for eid, verts in enumerate(edges):
            edge = Hyperedge(eid, tuple(verts))
            key = edge.vertex_set
            if key in seen:
                raise ValueError(f"edge {eid} duplicates an earlier edge {sorted(key)}")
            seen.add(key)
            built.append(edge)
            for x in edge.vertices:
                incidence.setdefault(x, []).append(eid)
        self._edges: tuple[Hyperedge, ...] = tuple(built)
        self._incidence: dict[VertexId, tuple[int, ...]] = {
            x: tuple(eids) for x, eids in incidence.items()
        }
        self._vertices: frozenset[VertexId] = frozenset(incidence)

    # -- basic accessors ----------------------------------------------------

    @property
    def vertices(self) -> frozenset[VertexId]:
        return self._vertices

    @property
    def edges(self) -> tuple[Hyperedge, ...]:
        return self._edges

    @property
    def vertex_count(self) -> int:
        return len(self._vertices)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def edge(self, eid: int) -> Hyperedge:
        if not 0 <= eid < len(self._edges):
            raise KeyError(f"unknown edge id {eid}")
        return self._edges[eid]

    def edge_degree(self, x: VertexId) -> int:
        """Number of edges containing x (written n_H(x) in the reports)."""
        return len(self._require_vertex(x))

    def vertex_neighbors(self, x: VertexId) -> frozenset[VertexId]:
        """Vertices sharing at least one edge with x, excluding x itself."""
        out: set[VertexId] = set()
        for eid in self._require_vertex(x):
            out.update(self._edges[eid].vertices)
        out.discard(x)
        return frozenset(out)

    def _require_vertex(self, x: VertexId) -> tuple[int, ...]:
        try:
            return self._incidence[x]
        except KeyError:
            raise KeyError(f"unknown vertex id {x}") from None

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": sorted(self._vertices),
            "edges": [list(e.vertices) for e in self._edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, data: dict) -> "Hypergraph":
        hg = cls(data["edges"])
        declared = set(data.get("vertices", []))
        if declared and declared != set(hg.vertices):
            raise ValueError("declared vertex set does not match the union of the edges")
        return hg

    @classmethod
    def from_json(cls, text: str) -> "Hypergraph":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"Hypergraph({self.vertex_count} vertices, {self.edge_count} edges)"


def edge_neighborhood(hg: Hypergraph, x: VertexId) -> frozenset[int]:
    """Ids of all edges containing the vertex x."""
    return frozenset(hg._require_vertex(x))


def boundary(hg: Hypergraph, region: Iterable[VertexId]) -> frozenset[VertexId]:
    """Outer vertex boundary of a region.

    Returns every vertex outside the region that shares an edge with some
    vertex inside it.  The result is disjoint from the region by definition.

    Raises:
        ValueError: if the region is empty.
        KeyError: if the region contains an unknown vertex.
    """
    inside = set(region)
    if not inside:
        raise ValueError("boundary of an empty region is undefined")
    out: set[VertexId] = set()
    for x in inside:
        out.update(hg.vertex_neighbors(x))
    return frozenset(out - inside)


def span(hg: Hypergraph, edge_ids: Iterable[int]) -> frozenset[VertexId]:
    """Union of the vertex sets of the given edges; empty input gives the empty set."""
    out: set[VertexId] = set()
    for eid in edge_ids:
        out.update(hg.edge(eid).vertices)
    return frozenset(out)


@dataclass
class SeparabilityReport:
    """Result of the pairwise-intersection check.

    ``passed`` refers to the intersection condition: for every checked vertex
    x the common intersection of all edges containing x is exactly {x}.  In
    the default lenient mode, vertices lying in a single edge are exempt
    (a truncated model necessarily ends in such vertices); strict mode checks
    them too and therefore fails on any edge with a degree-one vertex.

    When the intersection condition passes, the line-graph degree of every
    edge is additionally checked against the structural bounds it implies:

        (#vertices of e lying in >= 2 edges) - 1
            <= n_L(e) <= |e| * max over x in e of (n_H(x) - 1).

    The lower bound counts only vertices with a second edge; for graphs with
    no degree-one vertices it reduces to |e| - 1.
    """

    passed: bool
    strict: bool
    witnesses: list[tuple[VertexId, VertexId]] = field(default_factory=list)
    degree_bound_failures: list[dict] = field(default_factory=list)

    @property
    def bounds_ok(self) -> bool:
        return not self.degree_bound_failures


def check_separability(hg: Hypergraph, strict: bool = False) -> SeparabilityReport:
    """Check that edges through any common vertex intersect only in that vertex.

    Args:
        hg: the hypergraph to inspect.
        strict: when True, vertices contained in a single edge are checked
            like any other (and always fail, since their one edge has at
            least two vertices).  Default False exempts them.

    Returns:
        A SeparabilityReport with witnesses (x, y) such that y != x lies in
        every edge containing x, plus line-graph degree bound violations when
        the intersection condition holds.
    """
    witnesses: list[tuple[VertexId, VertexId]] = []
    seen_pairs: set[frozenset[VertexId]] = set()
    for x in sorted(hg.vertices):
        eids = hg._incidence[x]
        if len(eids) == 1 and not strict:
            continue
        common = set(hg.edge(eids[0]).vertices)
        for eid in eids[1:]:
            common &= hg.edge(eid).vertex_set
        for y in sorted(common - {x}):
            pair = frozenset((x, y))
            if pair not in seen_pairs:
                seen_pairs.add(pair)
                witnesses.append((x, y))

    report = SeparabilityReport(passed=not witnesses, strict=strict, witnesses=witnesses)
    if not report.passed:
        return report

    for edge in hg.edges:
        n_l = len(_intersecting_edges(hg, edge))
        active = sum(1 for x in edge if hg.edge_degree(x) >= 2)
        lower = max(active - 1, 0)
        upper = len(edge) * max(hg.edge_degree(x) - 1 for x in edge)
        if not lower <= n_l <= upper:
            report.degree_bound_failures.append(
                {"edge": edge.id, "line_degree": n_l, "lower": lower, "upper": upper}
            )
    return report


def _intersecting_edges(hg: Hypergraph, edge: Hyperedge) -> set[int]:
    out: set[int] = set()
    for x in edge.vertices:
        out.update(hg._incidence[x])
    out.discard(edge.id)
    return out
