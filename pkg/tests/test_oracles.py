import numpy as np
import pytest

from src.artifacts import Color, ForestDecomposition, Orientation, PaletteColoring, TwoColoring, orient_by_id
from src.config import OracleConfig
from src.errors import BudgetExceeded, IncompleteAssignmentError, ParameterError
from src.graph import Graph, clique, cycle, forest_union, path, random_tree, regular, star
from src.oracles import (
    Contract,
    arboricity_exact_small,
    check,
    enumerate_min_max_outdegree,
    euler_split,
    exhaustive_arboricity,
    exhaustive_min_max_outdegree,
    min_max_outdegree_exact,
)

try:
    from hypothesis import given, settings
except ModuleNotFoundError:  # pragma: no cover
    pytest.skip("hypothesis not installed", allow_module_level=True)

from .strategies import multigraphs, simple_graphs


def around_cycle(n: int) -> Orientation:
    g = cycle(n)
    return Orientation({e.eid: (e.u, e.v) if e.eid < n - 1 else (n - 1, 0) for e in g.edges})


# --- contracts ---------------------------------------------------------------------

@pytest.mark.parametrize("text,kind", [
    ("sinkless", "sinkless"),
    ("proper", "proper"),
    ("balance:3", "balance"),
    ("in_out:2,3", "in_out_bounds"),
    ("forests:star", "forests"),
])
def test_contract_parse(text, kind):
    contract = Contract.parse(text)
    assert contract.kind == kind
    assert Contract.parse(contract.label()) == contract


@pytest.mark.parametrize("text", ["balance", "in_out:2", "sinks", "forests:trees"])
def test_contract_parse_rejects_malformed(text):
    with pytest.raises(ParameterError):
        Contract.parse(text)


def test_consistent_cycle_is_sinkless():
    report = check(cycle(6), around_cycle(6), Contract(kind="sinkless"))
    assert report.passed


def test_inward_star_fails_with_center_witness():
    g = star(4)
    inward = Orientation({e.eid: (e.v, 0) for e in g.edges})
    report = check(g, inward, Contract(kind="sinkless"))
    assert not report.passed
    assert report.failures()[0].witness == {"node": 0}


def test_orientation_must_match_endpoints():
    g = path(3)
    bogus = Orientation({0: (0, 1), 1: (0, 2)})
    report = check(g, bogus, Contract(kind="sinkless"))
    assert report.failures()[0].name == "orientation_endpoints"


def test_in_out_bounds_witness():
    g = star(3)
    outward = orient_by_id(g)
    report = check(g, outward, Contract(kind="in_out_bounds", d_in=1, d_out=2))
    failed = report.failures()
    assert [c.name for c in failed] == ["out_degree<=2"]
    assert failed[0].witness == {"node": 0, "degree": 3}


def test_incomplete_artifact_raises():
    with pytest.raises(IncompleteAssignmentError):
        check(cycle(4), Orientation({0: (0, 1)}), Contract(kind="sinkless"))


def test_artifact_kind_must_match_contract():
    with pytest.raises(ParameterError):
        check(cycle(4), TwoColoring({i: Color.RED for i in range(4)}), Contract(kind="proper"))


def test_tampered_coloring_reports_conflicting_pair():
    g = path(3)
    report = check(g, PaletteColoring(3, {0: 1, 1: 1}), Contract(kind="proper"))
    failure = report.failures()[0]
    assert failure.name == "proper"
    assert failure.witness["edges"] == [0, 1]
    assert failure.witness["node"] == 1


def test_palette_range_checked():
    report = check(path(2), PaletteColoring(2, {0: 5}), Contract(kind="proper"))
    assert [c.name for c in report.failures()] == ["palette_range"]


def test_forest_checks_find_cycle_and_non_star():
    g = Graph(4, [(0, 0, 1), (1, 1, 2), (2, 2, 0), (3, 2, 3)])
    one_forest = ForestDecomposition({0: 0, 1: 0, 2: 0, 3: 1}, 2, (False, True))
    report = check(g, one_forest, Contract(kind="forests", star=True))
    acyclic = next(c for c in report.checks if c.name == "acyclic")
    assert not acyclic.passed
    assert acyclic.witness == {"forest": 0, "cycle": [0, 1, 2]}

    paths = ForestDecomposition({0: 0, 1: 0, 2: 1, 3: 0}, 2, (True, False))
    stars = next(c for c in check(g, paths, Contract(kind="forests", star=True)).checks
                 if c.name == "star_components")
    assert not stars.passed
    assert stars.witness == {"forest": 0, "node": 2}


# --- euler split -------------------------------------------------------------------

def test_euler_split_even_cycle_alternates():
    coloring = euler_split(cycle(8))
    red, blue = coloring.degrees(cycle(8))
    assert red == blue == [1] * 8


def test_euler_split_triangle_needs_the_extra_edge():
    g = clique(3)
    assert euler_split(g).max_color_degree(g) == 2


def test_euler_split_regular():
    g = regular(100, 10, np.random.default_rng(1))
    assert euler_split(g).max_color_degree(g) <= 6


@given(multigraphs(max_nodes=10, max_edges=24))
def test_euler_split_bound_holds_everywhere(g: Graph):
    coloring = euler_split(g)
    assert not coloring.missing(g)
    assert coloring.max_color_degree(g) <= g.max_degree // 2 + 1


# --- exact oracles -----------------------------------------------------------------

@pytest.mark.parametrize("g,expected", [
    (cycle(6), 1),
    (clique(3), 1),
    (clique(5), 2),
    (path(5), 1),
    (Graph(1, [(0, 0, None), (1, 0, None)]), 2),
])
def test_min_max_outdegree_examples(g, expected):
    assert min_max_outdegree_exact(g) == expected


@pytest.mark.parametrize("g,expected", [
    (random_tree(12, np.random.default_rng(2)), 1),
    (clique(4), 2),
    (clique(5), 3),
    (cycle(5), 2),
])
def test_arboricity_examples(g, expected):
    assert arboricity_exact_small(g) == expected


def test_forest_union_arboricity_bounded():
    assert arboricity_exact_small(forest_union(50, 3, np.random.default_rng(5))) <= 3


def test_oracle_caps():
    with pytest.raises(BudgetExceeded):
        min_max_outdegree_exact(cycle(20), OracleConfig(outdegree_cap=10))
    with pytest.raises(BudgetExceeded):
        arboricity_exact_small(cycle(20), OracleConfig(arboricity_cap=10))


def test_enumeration_agrees_on_clique5():
    assert enumerate_min_max_outdegree(clique(5)) == 2


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_nodes=10, max_edges=14))
def test_min_max_outdegree_matches_enumeration(g: Graph):
    expected = enumerate_min_max_outdegree(g)
    assert min_max_outdegree_exact(g) == expected
    assert exhaustive_min_max_outdegree(g) == expected


@settings(max_examples=60, deadline=None)
@given(simple_graphs(max_nodes=8))
def test_arboricity_matches_exhaustive(g: Graph):
    assert arboricity_exact_small(g) == exhaustive_arboricity(g)
