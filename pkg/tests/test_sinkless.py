import math

import numpy as np
import pytest

from src.config import SinklessConfig
from src.errors import BudgetExceeded, PreconditionError
from src.graph import Graph, clique, cycle, path, random_tree, regular
from src.oracles import Contract, check
from src.simulator import RunMetrics
from src.sinkless import (
    ShortCycle,
    bad_component_report,
    cycle_length_bound,
    deterministic_sinkless,
    full_adjacency,
    least_short_cycle,
    pre_shatter,
    short_cycle_choices,
    shatter_and_finish,
    sinkless_dispatch,
    sinkless_low_degree,
)


def assert_sinkless(g, orientation):
    report = check(g, orientation, Contract(kind="sinkless"))
    assert report.passed, report.failures()


def irregular(n: int, d: int, extra: int, seed: int = 0) -> Graph:
    """A d-regular graph with `extra` more edges at node 0."""
    g = regular(n, d, np.random.default_rng(seed))
    taken = set(g.neighbors(0)) | {0}
    added = [v for v in range(n) if v not in taken][:extra]
    edges = [(e.eid, e.u, e.v) for e in g.edges] + [(g.m + i, 0, v) for i, v in enumerate(added)]
    return Graph(n, edges)


# --- short cycles ------------------------------------------------------------------

def test_least_cycle_through_edge_is_canonical():
    g = clique(4)
    cycle3 = least_short_cycle(full_adjacency(g), 0, 0, 1, limit=3, cap=100)
    assert cycle3 == ShortCycle(eids=(0, 3, 1), nodes=(0, 1, 2))
    assert cycle3.direction_of(0) == (0, 1)
    assert cycle3.direction_of(1) == (2, 0)


def test_least_cycle_compares_edge_ids_before_length():
    # triangle 0-1-2 is (0, 1, 4); square 0-1-2-3 is (0, 1, 2, 3) and sorts first
    g = Graph(4, [(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 3, 0), (4, 0, 2)])
    adj = full_adjacency(g)
    assert least_short_cycle(adj, 0, 0, 1, limit=3, cap=100).key == (0, 1, 4)
    square = least_short_cycle(adj, 0, 0, 1, limit=4, cap=100)
    assert square == ShortCycle(eids=(0, 1, 2, 3), nodes=(0, 1, 2, 3))
    assert short_cycle_choices(g, limit=4)[4].key == (0, 1, 4)


def test_cycle_search_budget():
    with pytest.raises(BudgetExceeded):
        least_short_cycle(full_adjacency(clique(8)), 27, 6, 7, limit=8, cap=3)


def test_cycle_too_long_for_limit():
    assert least_short_cycle(full_adjacency(cycle(6)), 0, 0, 1, limit=5, cap=100) is None
    assert least_short_cycle(full_adjacency(cycle(6)), 0, 0, 1, limit=6, cap=100).length == 6


def test_trees_have_no_short_cycles():
    assert short_cycle_choices(random_tree(20, np.random.default_rng(1)), limit=20) == {}


def test_cycle_length_bound():
    assert cycle_length_bound(1000, 3) == 20
    assert cycle_length_bound(10, 2) == 10
    assert cycle_length_bound(1, 5) == 1


# --- deterministic -------------------------------------------------------------------

def test_deterministic_on_cubic_graph(cubic):
    metrics = RunMetrics()
    assert_sinkless(cubic, deterministic_sinkless(cubic, 3, metrics=metrics))
    assert metrics.per_phase_rounds["deterministic"] > 0


def test_deterministic_rejects_small_d(cubic):
    with pytest.raises(PreconditionError):
        deterministic_sinkless(cubic, 2)
    with pytest.raises(PreconditionError):
        deterministic_sinkless(cubic, 4)


def test_deterministic_with_half_edges():
    g = Graph(4, [(0, 0, 1), (1, 1, 2), (2, 2, 3), (3, 0, None), (4, 0, None), (5, 1, None),
                  (6, 2, None), (7, 3, None), (8, 3, None)])
    assert_sinkless(g, deterministic_sinkless(g, 3))


# --- shattering ----------------------------------------------------------------------

def test_pre_shatter_needs_regular_graph():
    with pytest.raises(PreconditionError):
        pre_shatter(path(5), seed=1)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_pre_shatter_leaves_small_components(seed):
    g = regular(200, 4, np.random.default_rng(seed))
    result = pre_shatter(g, seed)
    report = bad_component_report(result, g.n)
    assert report["max_component"] == result.max_bad_component
    assert report["bad_nodes"] == len(result.bad) == sum(report["types"].values())
    assert result.residual.graph.n == len(result.bad)
    assert all(not any(x in result.bad for x in g.edge(eid).endpoints()) or eid in result.marked
               for eid in result.partial.direction)


@pytest.mark.parametrize("delta", [3, 4, 8])
def test_shatter_and_finish_is_sinkless(delta):
    g = regular(150, delta, np.random.default_rng(delta))
    metrics = RunMetrics()
    orientation = shatter_and_finish(g, seed=5, metrics=metrics)
    assert_sinkless(g, orientation)
    assert "shatter.mark" in metrics.per_phase_rounds
    assert metrics.max_bad_component is not None


# --- irregular inputs ----------------------------------------------------------------

def test_low_degree_path_on_irregular_graph():
    g = irregular(80, 3, extra=4)
    assert not g.is_regular()
    assert_sinkless(g, sinkless_low_degree(g, 3))


def test_low_degree_path_builds_clusters():
    g = irregular(600, 3, extra=2, seed=3)
    metrics = RunMetrics()
    orientation = sinkless_low_degree(g, 3, SinklessConfig(high_degree_threshold=3), metrics, seed=2)
    assert_sinkless(g, orientation)
    assert metrics.per_phase_rounds["short_cycles"] == 12


def test_low_degree_rejects_degree_out_of_range():
    with pytest.raises(PreconditionError):
        sinkless_low_degree(cycle(6), 2)


# --- dispatch ------------------------------------------------------------------------

def test_dispatch_rejects_degree_two(cycle8):
    with pytest.raises(PreconditionError):
        sinkless_dispatch(cycle8, seed=1)


def test_dispatch_sends_low_degree_graphs_to_clustering(cubic):
    orientation, metrics = sinkless_dispatch(cubic, seed=1)
    assert_sinkless(cubic, orientation)
    assert "short_cycles" in metrics.per_phase_rounds
    assert not any(phase.startswith("shatter.") for phase in metrics.per_phase_rounds)


def test_dispatch_rejects_leaves():
    with pytest.raises(PreconditionError):
        sinkless_dispatch(path(4), seed=1)


def test_dispatch_fast_path_on_dense_graph():
    g = regular(50, 20, np.random.default_rng(4))
    assert 20 >= 4.0 * math.log(50)
    orientation, metrics = sinkless_dispatch(g, seed=3)
    assert_sinkless(g, orientation)
    assert "random_orient" in metrics.per_phase_rounds


def test_dispatch_high_degree_copies():
    g = irregular(60, 4, extra=3, seed=8)
    config = SinklessConfig(high_degree_threshold=3, fast_path_c1=100.0)
    orientation, metrics = sinkless_dispatch(g, seed=6, config=config)
    assert_sinkless(g, orientation)
    assert any(phase.startswith("shatter.") for phase in metrics.per_phase_rounds)


def test_dispatch_is_deterministic_per_seed():
    g = regular(120, 3, np.random.default_rng(2))
    first, _ = sinkless_dispatch(g, seed=11)
    again, _ = sinkless_dispatch(g, seed=11)
    assert first == again


@pytest.mark.slow
@pytest.mark.parametrize("n", [100, 1000])
@pytest.mark.parametrize("delta", [3, 4, 5, 6, 8, 10, 12, 16])
def test_sinkless_matrix(n, delta):
    for seed in range(1, 21):
        g = regular(n, delta, np.random.default_rng(seed))
        orientation, _ = sinkless_dispatch(g, seed)
        assert_sinkless(g, orientation)
