import json

import pytest

from gibbscert.hypergraph import (
    Hyperedge,
    Hypergraph,
    boundary,
    check_separability,
    edge_neighborhood,
    span,
)


class TestHyperedge:
    def test_vertices_sorted_on_construction(self):
        e = Hyperedge(0, (5, 1, 3))
        assert e.vertices == (1, 3, 5)

    def test_len_contains_iter(self):
        e = Hyperedge(2, (4, 7))
        assert len(e) == 2
        assert 4 in e and 7 in e and 5 not in e
        assert list(e) == [4, 7]

    def test_singleton_rejected(self):
        with pytest.raises(ValueError, match="singleton"):
            Hyperedge(0, (3,))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Hyperedge(0, ())

    def test_repeated_vertex_rejected(self):
        with pytest.raises(ValueError, match="twice"):
            Hyperedge(1, (2, 2, 3))


class TestHypergraph:
    def test_ids_dense_in_order(self, triangle_chain):
        assert [e.id for e in triangle_chain.edges] == [0, 1, 2]

    def test_vertices_union_of_edges(self, triangle_chain):
        assert triangle_chain.vertices == frozenset(range(7))
        assert triangle_chain.vertex_count == 7
        assert triangle_chain.edge_count == 3

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError, match="duplicates"):
            Hypergraph([[0, 1, 2], [2, 1, 0]])

    def test_edge_lookup(self, triangle_chain):
        assert triangle_chain.edge(1).vertices == (2, 3, 4)
        with pytest.raises(KeyError):
            triangle_chain.edge(3)
        with pytest.raises(KeyError):
            triangle_chain.edge(-1)

    def test_edge_degree(self, triangle_chain):
        assert triangle_chain.edge_degree(2) == 2
        assert triangle_chain.edge_degree(0) == 1
        with pytest.raises(KeyError, match="unknown vertex"):
            triangle_chain.edge_degree(99)

    def test_vertex_neighbors_excludes_self(self, triangle_chain):
        assert triangle_chain.vertex_neighbors(2) == frozenset({0, 1, 3, 4})
        assert triangle_chain.vertex_neighbors(6) == frozenset({4, 5})

    def test_json_round_trip(self, triangle_chain):
        text = triangle_chain.to_json()
        back = Hypergraph.from_json(text)
        assert back.to_json() == text
        assert [e.vertices for e in back.edges] == [e.vertices for e in triangle_chain.edges]

    def test_json_declared_vertices_must_match(self):
        data = {"vertices": [0, 1, 2, 99], "edges": [[0, 1], [1, 2]]}
        with pytest.raises(ValueError, match="declared vertex set"):
            Hypergraph.from_json(json.dumps(data))

    def test_json_output_ends_with_newline(self, triangle_chain):
        assert triangle_chain.to_json().endswith("\n")


class TestRegionOps:
    def test_edge_neighborhood(self, triangle_chain):
        assert edge_neighborhood(triangle_chain, 2) == frozenset({0, 1})
        assert edge_neighborhood(triangle_chain, 5) == frozenset({2})

    def test_boundary_is_outer_and_disjoint(self, triangle_chain):
        region = {0, 1, 2}
        b = boundary(triangle_chain, region)
        assert b == frozenset({3, 4})
        assert not b & region

    def test_boundary_of_everything_is_empty(self, triangle_chain):
        assert boundary(triangle_chain, triangle_chain.vertices) == frozenset()

    def test_boundary_empty_region_rejected(self, triangle_chain):
        with pytest.raises(ValueError, match="empty region"):
            boundary(triangle_chain, [])

    def test_boundary_unknown_vertex_rejected(self, triangle_chain):
        with pytest.raises(KeyError):
            boundary(triangle_chain, [0, 42])

    def test_span(self, triangle_chain):
        assert span(triangle_chain, [0, 1]) == frozenset(range(5))
        assert span(triangle_chain, []) == frozenset()

    def test_span_unknown_edge_rejected(self, triangle_chain):
        with pytest.raises(KeyError):
            span(triangle_chain, [7])


class TestSeparability:
    def test_single_overlap_chain_passes(self, triangle_chain):
        report = check_separability(triangle_chain)
        assert report.passed
        assert report.witnesses == []
        assert report.bounds_ok

    def test_double_overlap_detected(self):
        hg = Hypergraph([[0, 1, 2], [0, 1, 3]])
        report = check_separability(hg)
        assert not report.passed
        assert (0, 1) in report.witnesses

    def test_witness_pairs_not_duplicated(self):
        hg = Hypergraph([[0, 1, 2], [0, 1, 3]])
        report = check_separability(hg)
        pairs = [frozenset(w) for w in report.witnesses]
        assert len(pairs) == len(set(pairs))

    def test_strict_mode_flags_degree_one_vertices(self, triangle_chain):
        # vertex 0 lies in a single edge, so its edges trivially share {0, 1, 2}
        report = check_separability(triangle_chain, strict=True)
        assert report.strict
        assert not report.passed

    def test_line_degree_bounds_on_chain(self, triangle_chain):
        report = check_separability(triangle_chain)
        # middle edge meets both others: n_L = 2, within [active-1, |e|*(max deg-1)]
        assert report.bounds_ok

    def test_lower_bound_ignores_degree_one_vertices(self):
        # a lone pair edge has no vertex in two edges, so the lower bound is 0
        hg = Hypergraph([[0, 1]])
        report = check_separability(hg)
        assert report.passed
        assert report.bounds_ok
