import pytest

from gibbscert.hypergraph import Hypergraph
from gibbscert.linegraph import build_line_graph
from gibbscert.models import CliqueTreeSpec, build_overlapping_cliques


@pytest.fixture
def triangle_chain():
    """Three 3-cliques glued along single vertices: 0-1-2 / 2-3-4 / 4-5-6."""
    return Hypergraph([[0, 1, 2], [2, 3, 4], [4, 5, 6]])


@pytest.fixture
def chain_line_graph(triangle_chain):
    return build_line_graph(triangle_chain)


@pytest.fixture
def cliques_depth2():
    """9 vertices, 4 edges; small enough for full enumeration everywhere."""
    spec = CliqueTreeSpec.constant(3, 2, coupling=0.25)
    return build_overlapping_cliques(spec)


@pytest.fixture
def cliques_depth3():
    spec = CliqueTreeSpec.constant(3, 3, coupling=0.2)
    return build_overlapping_cliques(spec)


def regular_tree_adjacency(degree: int, depth: int) -> dict[int, tuple[int, ...]]:
    """Rooted tree where every non-leaf node has the given total degree.

    Node 0 is the root with `degree` children; interior nodes get degree - 1
    children; nodes at the given depth are leaves.
    """
    adjacency: dict[int, list[int]] = {0: []}
    frontier = [0]
    next_id = 1
    for level in range(depth):
        new_frontier = []
        for node in frontier:
            kids = degree if node == 0 else degree - 1
            for _ in range(kids):
                adjacency[node].append(next_id)
                adjacency[next_id] = [node]
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    return {node: tuple(nbrs) for node, nbrs in adjacency.items()}
