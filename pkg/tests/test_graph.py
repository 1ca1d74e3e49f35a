import networkx as nx
import numpy as np
import pytest

from src.artifacts import Color, Orientation, PaletteColoring, TwoColoring
from src.errors import IncompleteAssignmentError, ParameterError
from src.graph import (
    FamilySpec,
    Graph,
    components,
    cycle,
    devirtualize,
    edge_subgraph,
    forest_union,
    generate,
    induced,
    path,
    regular,
    star,
    virtualize,
)

try:
    from hypothesis import given
    from hypothesis import strategies as st
except ModuleNotFoundError:  # pragma: no cover
    pytest.skip("hypothesis not installed", allow_module_level=True)

from .strategies import multigraphs


def test_half_edges_count_toward_degree():
    g = Graph(2, [(0, 0, 1), (1, 0, None)])
    assert g.degree(0) == 2
    assert g.degree(1) == 1
    assert [e.eid for e in g.half_edges()] == [1]
    assert g.edge(1).other(0) is None


@pytest.mark.parametrize("edges", [
    [(0, 1, 1)],
    [(1, 0, 1)],
    [(0, 0, 5)],
])
def test_malformed_edges_rejected(edges):
    with pytest.raises(ParameterError):
        Graph(3, edges)


def test_cycle_is_two_regular(cycle8):
    assert cycle8.m == 8
    assert cycle8.is_regular()
    assert cycle8.max_degree == 2


def test_regular_generator_is_simple_and_seeded():
    g = regular(50, 5, np.random.default_rng(3))
    assert g.degrees() == [5] * 50
    pairs = [tuple(sorted(e.endpoints())) for e in g.edges]
    assert len(pairs) == len(set(pairs))
    assert g == regular(50, 5, np.random.default_rng(3))


def test_regular_generator_rejects_odd_stub_count():
    with pytest.raises(ParameterError):
        regular(7, 3, np.random.default_rng(0))


def test_forest_union_is_a_union_of_spanning_trees():
    n, a = 30, 3
    g = forest_union(n, a, np.random.default_rng(11))
    assert g.m == a * (n - 1)
    for i in range(a):
        chunk = g.edges[i * (n - 1):(i + 1) * (n - 1)]
        tree = nx.MultiGraph()
        tree.add_nodes_from(range(n))
        tree.add_edges_from((e.u, e.v) for e in chunk)
        assert nx.is_tree(tree)


def test_family_spec_requires_family_parameter():
    with pytest.raises(ValueError):
        FamilySpec(family="regular", n=10)
    g = generate(FamilySpec(family="forest_union", n=12, a=2, seed=5))
    assert g.m == 22


def test_induced_keeps_boundary_as_half_edges():
    g = cycle(4)
    sub = induced(g, [0, 1], boundary="half")
    assert sub.node_map == (0, 1)
    assert sub.edge_map == (0, 1, 3)
    assert sub.graph.degrees() == [2, 2]
    assert len(sub.graph.half_edges()) == 2

    dropped = induced(g, [0, 1], boundary="drop")
    assert dropped.edge_map == (0,)


def test_edge_subgraph_relabels_touched_nodes():
    sub = edge_subgraph(path(6), [3, 4])
    assert sub.node_map == (3, 4, 5)
    assert sub.graph.m == 2


def test_components_are_sorted_and_cover_isolated_nodes():
    g = Graph(5, [(0, 0, 1), (1, 3, 4)])
    assert components(g) == [[0, 1], [2], [3, 4]]
    assert components(g, [1, 2, 3]) == [[1], [2], [3]]


def test_virtualize_splits_high_degree_nodes():
    g = star(5)
    copy, vmap = virtualize(g, 2)
    assert copy.n == 8
    assert copy.max_degree == 2
    assert vmap.copies[0] == (0, 1, 2)
    assert [vmap.original(c) for c in range(copy.n)] == [0, 0, 0, 1, 2, 3, 4, 5]


def test_virtualize_is_identity_when_degree_fits(cubic):
    copy, vmap = virtualize(cubic, 3)
    assert vmap.is_identity
    assert copy == cubic


def test_devirtualize_maps_orientation_back():
    g = star(4)
    copy, vmap = virtualize(g, 2)
    local = Orientation({e.eid: (e.u, e.v) for e in copy.edges})
    back = devirtualize(local, vmap)
    assert all(back.direction[e.eid] == (0, e.v) for e in g.edges)

    coloring = TwoColoring({e.eid: Color.RED for e in copy.edges})
    assert devirtualize(coloring, vmap).color == coloring.color


def test_devirtualize_rejects_incomplete_assignment():
    copy, vmap = virtualize(star(3), 1)
    with pytest.raises(IncompleteAssignmentError) as info:
        devirtualize(PaletteColoring(3, {0: 0}), vmap)
    assert info.value.missing == [1, 2]


def test_graph_json_form():
    g = Graph(3, [(0, 0, 1), (1, 2, None)])
    assert g.to_json() == {"n": 3, "edges": [[0, 0, 1], [1, 2, None]]}
    assert Graph.from_json(g.to_json()) == g


@given(multigraphs())
def test_degree_sum_counts_half_edges_once(g: Graph):
    g.audit()
    halves = len(g.half_edges())
    assert sum(g.degrees()) == 2 * (g.m - halves) + halves


@given(multigraphs(), st.integers(min_value=1, max_value=4))
def test_virtualize_preserves_edges(g: Graph, d: int):
    copy, vmap = virtualize(g, d)
    assert copy.m == g.m
    assert copy.max_degree <= d
    for edge, copy_edge in zip(g.edges, copy.edges):
        assert vmap.original(copy_edge.u) == edge.u
        assert vmap.original(copy_edge.v) == edge.v
