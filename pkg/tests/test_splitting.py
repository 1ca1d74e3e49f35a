import math

import numpy as np
import pytest

import src.splitting as splitting_module
from src.artifacts import Color, TwoColoring
from src.config import SplitConfig
from src.errors import BudgetExceeded, ParameterError, PreconditionError, StalePathError
from src.graph import Graph, regular, star
from src.oracles import Contract, check, euler_split
from src.splitting import (
    AugmentingPath,
    SplitStatistics,
    accept_paths,
    augment,
    balanced_split_high,
    balanced_split_low,
    balanced_split_randomized,
    find_augmenting_paths,
    find_paths_randomized,
    improve_balance,
    log_levels,
    node_labels,
    path_length_limit,
    sources,
    validate_path,
)

try:
    from hypothesis import given, settings
    from hypothesis import strategies as st
except ModuleNotFoundError:  # pragma: no cover
    pytest.skip("hypothesis not installed", allow_module_level=True)

from .strategies import multigraphs, seeds


def all_red(g: Graph) -> TwoColoring:
    return TwoColoring({e.eid: Color.RED for e in g.edges})


def assert_balanced(g: Graph, coloring: TwoColoring, t: int) -> None:
    report = check(g, coloring, Contract(kind="balance", t=t))
    assert report.passed, report.failures()


# --- labels and paths ----------------------------------------------------------------

def test_labels_and_sources():
    g = star(2)
    red = all_red(g)
    assert sources(g, red, 2) == [0]
    assert node_labels([2, 1, 1], [1, 0, 0], 0, 2) == {Color.RED, Color.BLUE}
    assert node_labels([2, 1, 1], [0, 0, 0], 1, 2) == {Color.RED}
    assert node_labels([2], [0], None, 2) == set()


def test_augment_flips_path_and_lowers_source():
    g = star(2)
    path = AugmentingPath(nodes=(0, 1), edges=(0,))
    flipped = augment(g, all_red(g), path, t=2)
    assert flipped.color == {0: Color.BLUE, 1: Color.RED}
    assert sources(g, flipped, 2) == []


@pytest.mark.parametrize("path", [
    AugmentingPath(nodes=(1, 0), edges=(0,)),
    AugmentingPath(nodes=(0, 2), edges=(0,)),
    AugmentingPath(nodes=(0, 1, 0), edges=(0, 0)),
    AugmentingPath(nodes=(0,), edges=()),
])
def test_stale_paths_rejected(path):
    g = star(2)
    with pytest.raises(StalePathError):
        validate_path(g, all_red(g), path, t=2)


def test_half_edge_terminal():
    g = Graph(1, [(0, 0, None), (1, 0, None)])
    path = AugmentingPath(nodes=(0, None), edges=(1,))
    assert path.terminal_key == ("half", 1)
    assert augment(g, all_red(g), path, t=2).max_color_degree(g) == 1


def test_accept_paths_keeps_one_per_terminal_and_drops_shared_edges():
    late = AugmentingPath((3, 5), (1,))
    early = AugmentingPath((1, 5), (2,))
    dangling = AugmentingPath((2, None), (4,))
    sharing = AugmentingPath((4, 6), (4,))
    assert accept_paths([late, sharing, dangling, early]) == [early, dangling]


def test_validate_path_uses_given_degrees():
    g = star(2)
    path = AugmentingPath(nodes=(0, 1), edges=(0,))
    validate_path(g, all_red(g), path, t=2, degrees=all_red(g).degrees(g))
    with pytest.raises(StalePathError):
        validate_path(g, all_red(g), path, t=2, degrees=([1, 1, 0], [1, 0, 1]))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_batch_augment_tracks_degrees_as_paths_flip(seed):
    g = regular(12, 4, np.random.default_rng(seed))
    coloring = all_red(g)
    accepted = accept_paths(find_augmenting_paths(g, coloring, 4, 0.5, strict=False))
    flipped, degrees = splitting_module._augment_all(g, coloring, accepted, 4, coloring.degrees(g))
    assert accepted
    assert degrees == flipped.degrees(g)
    assert coloring.degrees(g) == ([4] * 12, [0] * 12)


# --- deterministic splitting ---------------------------------------------------------------

def test_log_levels_floor_and_path_limit():
    config = SplitConfig()
    assert log_levels(1, config) == 1.0
    assert log_levels(1000, config) == pytest.approx(math.log(1000) / math.log(1.5))
    assert path_length_limit(100, 0.5, config) == 28


def test_token_search_returns_valid_paths_from_distinct_sources(cubic):
    coloring = all_red(cubic)
    stats = SplitStatistics()
    paths = find_augmenting_paths(cubic, coloring, 3, 0.5, strict=False, stats=stats)
    assert paths
    assert len({p.source for p in paths}) == len(paths)
    for path in paths:
        validate_path(cubic, coloring, path, 3)
    assert stats.levels[0].active == cubic.n
    assert stats.returned == len(paths)


def test_token_search_rejects_small_eps_d(cubic):
    with pytest.raises(ParameterError):
        find_augmenting_paths(cubic, all_red(cubic), 3, 0.5)


def test_improve_balance_needs_t_balanced_input(cubic):
    with pytest.raises(PreconditionError):
        improve_balance(cubic, all_red(cubic), 2, 0.5, strict=False)


def test_low_split_outside_regime_is_refused(cubic):
    with pytest.raises(ParameterError):
        balanced_split_low(cubic, 0.5)
    with pytest.raises(ParameterError):
        balanced_split_low(cubic, 0.0, strict=False)


def test_low_split_in_regime():
    g = regular(40, 8, np.random.default_rng(2))
    stats = SplitStatistics()
    coloring = balanced_split_low(g, 0.5, SplitConfig(regime_constant=0.1), stats=stats)
    assert_balanced(g, coloring, 6)
    assert stats.invocations >= 2
    assert stats.accepted <= stats.returned
    assert set(stats.to_dict()) == {"invocations", "returned", "accepted", "levels"}


def test_low_split_relaxed_regime():
    g = regular(40, 8, np.random.default_rng(3))
    assert_balanced(g, balanced_split_low(g, 0.5, strict=False), 6)


def test_empty_graph_splits_trivially():
    assert balanced_split_low(Graph(3), 0.5).color == {}
    assert balanced_split_randomized(Graph(3), 0.5, seed=1).color == {}


def test_high_split_needs_large_degree(cubic):
    with pytest.raises(PreconditionError):
        balanced_split_high(cubic, 0.5)


def test_high_split_through_copies():
    g = regular(60, 32, np.random.default_rng(5))
    config = SplitConfig(high_degree_constant=0.001, copy_degree_constant=0.1)
    seen = []

    def low_splitter(copies: Graph, eps: float) -> TwoColoring:
        seen.append((copies.n, copies.max_degree, eps))
        return euler_split(copies)

    coloring = balanced_split_high(g, 0.5, config, low_splitter=low_splitter)
    assert_balanced(g, coloring, 24)
    copies_n, copy_degree, eps = seen[0]
    assert copies_n > g.n
    assert copy_degree <= 7
    assert eps == 0.25


# --- randomized splitting --------------------------------------------------------------

def test_randomized_greedy_split():
    g = regular(60, 8, np.random.default_rng(4))
    stats = SplitStatistics()
    coloring = balanced_split_randomized(g, 0.5, seed=3, stats=stats)
    assert_balanced(g, coloring, 6)
    assert stats.accepted > 0


def test_randomized_luby_split_on_toy_graph():
    g = regular(12, 4, np.random.default_rng(6))
    coloring = balanced_split_randomized(g, 0.5, seed=2, mode="luby-supergraph")
    assert_balanced(g, coloring, 3)


@pytest.mark.parametrize("n,delta", [(12, 4), (10, 6)])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_search_modes_find_one_path_per_source(n, delta, seed):
    g = regular(n, delta, np.random.default_rng(seed))
    coloring = all_red(g)
    pending = sources(g, coloring, delta)
    greedy = find_paths_randomized(g, coloring, delta, 0.5, seed=seed)
    luby = find_paths_randomized(g, coloring, delta, 0.5, mode="luby-supergraph", seed=seed)
    assert len(greedy) == len(luby) == len(pending) == n
    assert sorted(p.source for p in luby) == pending


def test_randomized_split_is_reproducible():
    g = regular(30, 6, np.random.default_rng(8))
    assert balanced_split_randomized(g, 0.5, seed=9) == balanced_split_randomized(g, 0.5, seed=9)


def test_luby_mode_refuses_large_graphs():
    g = regular(100, 4, np.random.default_rng(1))
    with pytest.raises(BudgetExceeded):
        find_paths_randomized(g, all_red(g), 4, 0.5, mode="luby-supergraph")


def test_unknown_search_mode():
    g = regular(10, 4, np.random.default_rng(1))
    with pytest.raises(ParameterError):
        find_paths_randomized(g, all_red(g), 4, 0.5, mode="bogus")


def test_randomized_threshold_must_exceed_target():
    g = regular(10, 4, np.random.default_rng(1))
    with pytest.raises(PreconditionError):
        find_paths_randomized(g, all_red(g), 3, 0.5)


@settings(max_examples=50, deadline=None)
@given(multigraphs(max_nodes=8, max_edges=20), st.sampled_from([0.2, 0.5, 0.9]), seeds())
def test_randomized_split_bound_on_multigraphs(g: Graph, eps: float, seed: int):
    coloring = balanced_split_randomized(g, eps, seed)
    assert coloring.max_color_degree(g) <= math.ceil((1 + eps) * g.max_degree / 2)


@pytest.mark.slow
def test_low_split_on_dense_regular_graph():
    g = regular(258, 256, np.random.default_rng(1))
    assert_balanced(g, balanced_split_low(g, 0.5), 192)
