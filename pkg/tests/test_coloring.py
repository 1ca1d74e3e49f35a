import numpy as np
import pytest

from src.coloring import (
    base_color,
    base_palette,
    choose_x,
    coarse_color,
    coarse_palette_bound,
    fine_color,
    fine_plan,
    randomized_color,
    randomized_palette,
)
from src.config import ColoringConfig, SplitConfig
from src.errors import ParameterError, PreconditionError
from src.graph import Graph, clique, regular
from src.oracles import Contract, check, euler_split
from src.simulator import RunMetrics

try:
    from hypothesis import given, settings
except ModuleNotFoundError:  # pragma: no cover
    pytest.skip("hypothesis not installed", allow_module_level=True)

from .strategies import multigraphs, seeds


def assert_proper(g, coloring):
    report = check(g, coloring, Contract(kind="proper"))
    assert report.passed, report.failures()


# --- base --------------------------------------------------------------------------------

def test_base_palette():
    assert base_palette(5) == 9
    assert base_palette(0) == 0


def test_base_color_on_clique():
    g = clique(6)
    metrics = RunMetrics()
    coloring = base_color(g, seed=3, metrics=metrics)
    assert coloring.palette_size == 9
    assert_proper(g, coloring)
    assert metrics.rounds > 0


def test_base_color_with_half_edges():
    g = Graph(3, [(0, 0, 1), (1, 1, 2), (2, 1, None), (3, 0, None)])
    coloring = base_color(g, seed=1)
    assert_proper(g, coloring)
    assert coloring.color[2] not in (coloring.color[0], coloring.color[1])


def test_base_color_is_reproducible(cubic):
    assert base_color(cubic, seed=5) == base_color(cubic, seed=5)


@settings(max_examples=60, deadline=None)
@given(multigraphs(max_nodes=8, max_edges=18), seeds())
def test_base_color_is_proper_everywhere(g: Graph, seed: int):
    coloring = base_color(g, seed)
    assert_proper(g, coloring)
    assert coloring.palette_size == base_palette(g.max_degree)


# --- coarse ------------------------------------------------------------------------------

@pytest.mark.parametrize("rule,delta,eps,expected", [
    ("delta_pow", 16, 0.5, 4),
    ("log_pow", 256, 1.0, 8),
    ("exp_inv", 1000, 0.5, 4),
    ("delta_pow", 1, 0.5, 2),
])
def test_choose_x_rules(rule, delta, eps, expected):
    assert choose_x(delta, eps, rule) == expected


def test_choose_x_needs_its_inputs():
    assert choose_x(100, x=5) == 5
    with pytest.raises(ParameterError):
        choose_x(100)
    with pytest.raises(ParameterError):
        choose_x(100, None, "delta_pow")


def test_coarse_palette_bound():
    assert coarse_palette_bound(16, 4) == 49
    assert coarse_palette_bound(8, 4) == 15
    assert coarse_palette_bound(64, 4) == 343


def test_coarse_color_recurses_once():
    g = regular(40, 16, np.random.default_rng(2))
    metrics = RunMetrics()
    coloring = coarse_color(g, 4, seed=1, metrics=metrics)
    assert coloring.palette_size == 49
    assert_proper(g, coloring)
    assert metrics.per_phase_rounds["coarse_color"] > 0


def test_coarse_color_base_case(cubic):
    coloring = coarse_color(cubic, 2, seed=1)
    assert coloring.palette_size == 5
    assert_proper(cubic, coloring)


def test_coarse_color_rejects_small_x(cubic):
    with pytest.raises(ParameterError):
        coarse_color(cubic, 1)


# --- fine --------------------------------------------------------------------------------

def test_fine_plan_halves_with_slack():
    plan = fine_plan(16, 512, 0.9, SplitConfig(high_degree_constant=0.001))
    assert plan.degrees == (16, 8, 4, 2)
    assert plan.depth == 3
    assert plan.palette == 24


def test_fine_plan_at_small_scale_is_base_coloring():
    plan = fine_plan(3, 30, 0.5, SplitConfig())
    assert plan.depth == 0
    assert plan.palette == 5


def test_fine_color_recursion_with_exact_splits():
    g = regular(64, 16, np.random.default_rng(3))
    coloring = fine_color(g, 0.9, seed=2, split_config=SplitConfig(high_degree_constant=0.001),
                          splitter=lambda sub, eps: euler_split(sub))
    assert coloring.palette_size == 24
    assert_proper(g, coloring)


def test_fine_color_small_graph(cubic):
    coloring = fine_color(cubic, 0.5, seed=1)
    assert coloring.palette_size == 5
    assert_proper(cubic, coloring)


def test_fine_color_rejects_eps(cubic):
    with pytest.raises(ParameterError):
        fine_color(cubic, 1.0)


# --- randomized --------------------------------------------------------------------------

def test_randomized_palette_layout():
    plan = randomized_palette(64, 0.5, ColoringConfig())
    assert (plan.x, plan.block, plan.reserve) == (1, 144, 144)
    assert plan.size == 288


def test_randomized_color_needs_large_degree(cubic):
    with pytest.raises(PreconditionError):
        randomized_color(cubic, 0.5, seed=1)


def test_randomized_color_with_bad_components():
    g = regular(60, 8, np.random.default_rng(9))
    metrics = RunMetrics()
    coloring = randomized_color(g, 0.5, seed=4, config=ColoringConfig(randomized_min_delta=8),
                                metrics=metrics, x=2)
    assert coloring.palette_size == 36
    assert_proper(g, coloring)
    assert metrics.max_bad_component is not None
    assert {"good_classes", "bad_components"} <= set(metrics.per_phase_rounds)


def test_randomized_color_hands_high_degree_to_fine_color():
    g = regular(60, 8, np.random.default_rng(9))
    metrics = RunMetrics()
    config = ColoringConfig(randomized_min_delta=8, fine_branch_constant=0.25)
    coloring = randomized_color(g, 0.5, seed=4, config=config, metrics=metrics, x=2)
    assert coloring.palette_size <= (4 + 0.5) * 8
    assert_proper(g, coloring)
    assert "fine_base" in metrics.per_phase_rounds
    assert "good_classes" not in metrics.per_phase_rounds
    assert metrics.max_bad_component is None


def test_randomized_palette_rounds_block_up():
    plan = randomized_palette(10, 0.5, ColoringConfig(), x=3)
    assert plan.block == 8
    assert plan.size == 3 * 8 + 22


@pytest.mark.slow
def test_randomized_color_on_dense_graph():
    g = regular(1024, 64, np.random.default_rng(1))
    metrics = RunMetrics()
    coloring = randomized_color(g, 0.5, seed=7, config=ColoringConfig(fine_branch_constant=4.0), metrics=metrics)
    assert coloring.palette_size <= (4 + 0.5) * 64
    assert "good_classes" in metrics.per_phase_rounds
    assert_proper(g, coloring)
