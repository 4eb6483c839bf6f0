import math

import pytest

from gibbscert.hypergraph import Hypergraph
from gibbscert.linegraph import (
    INFINITE_DISTANCE,
    LineGraph,
    adjacency_json,
    ball,
    build_line_graph,
    dist,
    edge_list_csv,
    sphere,
    volume_of_ball,
)


class TestConstruction:
    def test_chain_adjacency(self, chain_line_graph):
        assert chain_line_graph.adjacency == {0: (1,), 1: (0, 2), 2: (1,)}

    def test_nodes_and_len(self, chain_line_graph):
        assert chain_line_graph.nodes == (0, 1, 2)
        assert len(chain_line_graph) == 3

    def test_degrees(self, chain_line_graph):
        assert chain_line_graph.degrees() == {0: 1, 1: 2, 2: 1}
        assert chain_line_graph.degree(1) == 2

    def test_adjacency_iff_edges_intersect(self):
        hg = Hypergraph([[0, 1], [1, 2], [3, 4], [2, 3, 5]])
        lg = build_line_graph(hg)
        assert lg.adjacency[0] == (1,)
        assert lg.adjacency[1] == (0, 3)
        assert lg.adjacency[2] == (3,)
        assert set(lg.adjacency[3]) == {1, 2}

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="adjacent to itself"):
            LineGraph({0: (0,)})

    def test_asymmetric_adjacency_rejected(self):
        with pytest.raises(ValueError, match="not symmetric"):
            LineGraph({0: (1,), 1: ()})

    def test_unknown_node_rejected(self):
        lg = LineGraph({0: (1,), 1: (0,)})
        with pytest.raises(KeyError, match="unknown line-graph node"):
            lg.degree(5)


class TestMetric:
    def test_distances_on_chain(self, chain_line_graph):
        assert dist(chain_line_graph, 0, 0) == 0
        assert dist(chain_line_graph, 0, 1) == 1
        assert dist(chain_line_graph, 0, 2) == 2
        assert dist(chain_line_graph, 2, 0) == 2

    def test_disconnected_pair_is_infinite(self):
        hg = Hypergraph([[0, 1], [2, 3]])
        lg = build_line_graph(hg)
        d = dist(lg, 0, 1)
        assert d == INFINITE_DISTANCE
        assert math.isinf(d)

    def test_distance_to_unknown_node_rejected(self, chain_line_graph):
        with pytest.raises(KeyError):
            dist(chain_line_graph, 0, 9)

    def test_ball_and_sphere(self, chain_line_graph):
        assert ball(chain_line_graph, 0, 0) == frozenset({0})
        assert ball(chain_line_graph, 0, 1) == frozenset({0, 1})
        assert sphere(chain_line_graph, 0, 2) == frozenset({2})
        assert sphere(chain_line_graph, 0, 3) == frozenset()

    def test_ball_is_union_of_spheres(self, chain_line_graph):
        for radius in range(4):
            union = frozenset().union(
                *(sphere(chain_line_graph, 1, r) for r in range(radius + 1))
            )
            assert ball(chain_line_graph, 1, radius) == union

    def test_negative_radius_rejected(self, chain_line_graph):
        with pytest.raises(ValueError):
            ball(chain_line_graph, 0, -1)
        with pytest.raises(ValueError):
            sphere(chain_line_graph, 0, -2)


class TestVolumeOfBall:
    def test_radius_zero_is_anchor_edge(self, cliques_depth3):
        hg, _ = cliques_depth3
        lg = build_line_graph(hg)
        volume, rim = volume_of_ball(hg, lg, 0, 0, 0)
        assert volume == frozenset(hg.edge(0).vertices)
        assert volume.isdisjoint(rim)

    def test_depth3_profile(self, cliques_depth3):
        hg, _ = cliques_depth3
        lg = build_line_graph(hg)
        sizes = {}
        for radius in (1, 2):
            volume, rim = volume_of_ball(hg, lg, 0, 0, radius)
            sizes[radius] = (len(volume), len(rim))
        assert sizes[1] == (9, 12)
        assert sizes[2] == (21, 0)

    def test_anchor_must_contain_vertex(self, cliques_depth3):
        hg, _ = cliques_depth3
        lg = build_line_graph(hg)
        outsider = max(hg.vertices)
        with pytest.raises(ValueError, match="does not lie in edge"):
            volume_of_ball(hg, lg, outsider, 0, 1)


class TestSerialization:
    def test_adjacency_json_round_trips_structure(self, chain_line_graph):
        import json

        data = json.loads(adjacency_json(chain_line_graph))
        rebuilt = LineGraph({int(k): tuple(v) for k, v in data.items()})
        assert rebuilt.adjacency == chain_line_graph.adjacency

    def test_adjacency_json_deterministic(self, chain_line_graph):
        assert adjacency_json(chain_line_graph) == adjacency_json(chain_line_graph)

    def test_edge_list_csv_rows(self, chain_line_graph):
        lines = edge_list_csv(chain_line_graph).strip().splitlines()
        assert lines[0] == "node_a,node_b"
        assert lines[1:] == ["0,1", "1,2"]

    def test_edge_list_each_pair_once(self, cliques_depth2):
        hg, _ = cliques_depth2
        lg = build_line_graph(hg)
        rows = edge_list_csv(lg).strip().splitlines()[1:]
        pairs = [tuple(map(int, r.split(","))) for r in rows]
        assert all(a < b for a, b in pairs)
        assert len(pairs) == len(set(pairs))
        assert len(pairs) == sum(lg.degree(n) for n in lg.nodes) // 2
