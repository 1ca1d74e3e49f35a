"""
Proper edge colorings.

base_color is a distributed greedy on the engine with palette 2*delta-1.
coarse_color and fine_color recurse on copy-node virtualization and on balanced
splits, giving every branch a disjoint block of the palette. randomized_color
partitions the edges at random, colors the well-behaved classes from one half
of the palette and the small bad components from the other.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

from .artifacts import Color, PaletteColoring, TwoColoring
from .config import ColoringConfig, SplitConfig, load_algorithms_config
from .errors import BadComponentTooLarge, InvariantViolation, ParameterError, PreconditionError
from .graph import Graph, components, devirtualize, edge_subgraph, virtualize
from .oracles import Contract, check
from .simulator import NodeProgram, RunMetrics, Step, StepContext, derive_seed, run
from .splitting import balanced_split_high, balanced_split_low, log_levels

logger = logging.getLogger(__name__)

XRule = Literal["fixed", "delta_pow", "log_pow", "exp_inv"]


def base_palette(delta: int) -> int:
    return max(2 * delta - 1, 0)


# --- base coloring ----------------------------------------------------------------------

@dataclass
class _ColorState:
    colors: dict[int, int] = field(default_factory=dict)
    used: set[int] = field(default_factory=set)
    priority: dict[int, tuple[float, int]] = field(default_factory=dict)


class _GreedyEdgeColoring(NodeProgram):
    """Three rounds per iteration. Owners (lower id endpoint) draw a priority for
    each uncolored edge; the other endpoint reports whether the edge is its local
    minimum along with the colors it uses; an edge minimal at both ends takes the
    smallest color free at both."""

    name = "base_color"

    def init(self, ctx: StepContext) -> Step:
        state = _ColorState()
        if not ctx.view.incident:
            return Step(state, halted=True)
        return Step(state, self._draw(state, ctx))

    def step(self, state: _ColorState, inbox, ctx: StepContext) -> Step:
        u = ctx.view.node
        phase = ctx.round % 3
        if phase == 1:
            for eid, (_, value) in inbox.items():
                state.priority[eid] = value
            reports = {}
            for eid, other in ctx.view.full_edges():
                if other < u and eid not in state.colors:
                    reports[eid] = ("report", (self._is_minimal(state, eid), frozenset(state.used)))
            return Step(state, reports)

        if phase == 2:
            announcements = {}
            for eid, other in ctx.view.incident:
                if eid in state.colors or (other is not None and other < u):
                    continue
                remote_minimal, remote_used = (True, frozenset()) if other is None else inbox[eid][1]
                if remote_minimal and self._is_minimal(state, eid):
                    taken = state.used | remote_used
                    color = next(c for c in range(len(taken) + 1) if c not in taken)
                    state.colors[eid] = color
                    state.used.add(color)
                    if other is not None:
                        announcements[eid] = ("color", color)
            return Step(state, announcements, halted=self._done(state, ctx))

        for eid, (_, color) in inbox.items():
            state.colors[eid] = color
            state.used.add(color)
        if self._done(state, ctx):
            return Step(state, halted=True)
        return Step(state, self._draw(state, ctx))

    @staticmethod
    def _draw(state: _ColorState, ctx: StepContext) -> dict:
        u = ctx.view.node
        state.priority = {}
        outbox = {}
        for eid, other in ctx.view.incident:
            if eid in state.colors or (other is not None and other < u):
                continue
            state.priority[eid] = (float(ctx.rng.random()), eid)
            if other is not None:
                outbox[eid] = ("priority", state.priority[eid])
        return outbox

    @staticmethod
    def _is_minimal(state: _ColorState, eid: int) -> bool:
        return state.priority[eid] == min(state.priority.values())

    @staticmethod
    def _done(state: _ColorState, ctx: StepContext) -> bool:
        return all(eid in state.colors for eid, _ in ctx.view.incident)


def base_color(g: Graph, seed: int = 0, metrics: Optional[RunMetrics] = None) -> PaletteColoring:
    max_rounds = load_algorithms_config().simulator.default_max_rounds
    states, run_metrics = run(g, _GreedyEdgeColoring(), max_rounds=max_rounds, seed=seed)
    if metrics is not None:
        metrics.absorb(run_metrics)
    colors: dict[int, int] = {}
    for state in states:
        colors.update(state.colors)
    return PaletteColoring(base_palette(g.max_degree), dict(sorted(colors.items())))


def _audit_proper(g: Graph, coloring: PaletteColoring, stage: str) -> PaletteColoring:
    report = check(g, coloring, Contract(kind="proper"))
    if not report.passed:
        raise InvariantViolation(f"{stage} produced an improper coloring", witness=report.failures()[0].witness)
    return coloring


# --- coarse recursion ------------------------------------------------------------------------

def choose_x(delta: int, eps: Optional[float] = None, rule: XRule = "fixed", x: Optional[int] = None) -> int:
    """Branching factor for coarse_color: given, ceil(delta^eps), ceil(log2(delta)^eps) or 2^ceil(1/eps)."""
    if rule == "fixed":
        if x is None:
            raise ParameterError("the fixed rule needs an explicit x")
        chosen = x
    else:
        if eps is None or eps <= 0:
            raise ParameterError(f"rule {rule!r} needs a positive eps")
        if rule == "delta_pow":
            chosen = math.ceil(max(delta, 1) ** eps)
        elif rule == "log_pow":
            chosen = math.ceil(math.log2(max(delta, 2)) ** eps)
        elif rule == "exp_inv":
            chosen = 2 ** math.ceil(1 / eps)
        else:
            raise ParameterError(f"unknown x rule {rule!r}")
    return max(chosen, 2)


def coarse_palette_bound(delta: int, x: int, base_threshold_factor: int = 2) -> int:
    """(2x-1) * bound(ceil(delta/x)) above the base case delta <= factor*x."""
    if delta <= base_threshold_factor * x:
        return base_palette(delta)
    return (2 * x - 1) * coarse_palette_bound(math.ceil(delta / x), x, base_threshold_factor)


def coarse_color(
    g: Graph,
    x: int,
    seed: int = 0,
    config: Optional[ColoringConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> PaletteColoring:
    config = config or load_algorithms_config().coloring
    if x < 2:
        raise ParameterError(f"x must be >= 2, got {x}")
    colors, rounds = _coarse(g, x, config.base_threshold_factor, seed)
    if metrics is not None:
        metrics.charge("coarse_color", rounds)
    palette = coarse_palette_bound(g.max_degree, x, config.base_threshold_factor)
    return _audit_proper(g, PaletteColoring(palette, dict(sorted(colors.items()))), "coarse_color")


def _coarse(g: Graph, x: int, factor: int, seed: int) -> tuple[dict[int, int], int]:
    delta = g.max_degree
    local = RunMetrics()
    if delta <= factor * x:
        return dict(base_color(g, seed, local).color), local.rounds

    copies, vmap = virtualize(g, x)
    classes = devirtualize(base_color(copies, derive_seed(seed, "copies"), local), vmap)
    block = coarse_palette_bound(math.ceil(delta / x), x, factor)
    colors: dict[int, int] = {}
    branch_rounds = 0
    for cls in range(2 * x - 1):
        members = [eid for eid, c in classes.color.items() if c == cls]
        if not members:
            continue
        sub = edge_subgraph(g, members)
        if sub.graph.max_degree > math.ceil(delta / x):
            raise InvariantViolation(f"class {cls} has degree {sub.graph.max_degree} > ceil({delta}/{x})",
                                     witness=cls)
        sub_colors, rounds = _coarse(sub.graph, x, factor, derive_seed(seed, "class", cls))
        branch_rounds = max(branch_rounds, rounds)
        for eid, c in sub_colors.items():
            colors[sub.edge_map[eid]] = cls * block + c
    return colors, local.rounds + branch_rounds


# --- fine recursion --------------------------------------------------------------------------

@dataclass(frozen=True)
class FinePlan:
    eps_prime: float
    threshold: int
    degrees: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.degrees) - 1

    @property
    def palette(self) -> int:
        return base_palette(self.degrees[-1]) * 2 ** self.depth


def fine_plan(delta: int, m: int, eps: float, split_config: SplitConfig) -> FinePlan:
    """Degree bounds delta_0 > delta_1 > ... > delta_t, halving with slack until the
    high-degree split no longer applies."""
    eps_prime = eps / (2 * math.log2(delta)) if delta >= 2 else eps
    threshold = math.ceil(split_config.high_degree_constant * log_levels(m, split_config) / eps_prime ** 2)
    degrees = [delta]
    while degrees[-1] > threshold:
        following = math.floor((1 + eps_prime) * degrees[-1] / 2)
        if following >= degrees[-1]:
            break
        degrees.append(following)
    return FinePlan(eps_prime, threshold, tuple(degrees))


Splitter = Callable[[Graph, float], TwoColoring]


def fine_color(
    g: Graph,
    eps: float,
    seed: int = 0,
    split_config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
    splitter: Optional[Splitter] = None,
) -> PaletteColoring:
    """(2+eps)*delta edge coloring by recursive balanced splitting."""
    split_config = split_config or load_algorithms_config().split
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    plan = fine_plan(g.max_degree, g.m, eps, split_config)
    logger.debug("fine_color: depth %d, degrees %s", plan.depth, plan.degrees)
    split = splitter or (lambda sub, e: _split_branch(sub, e, split_config, metrics))
    colors, rounds = _fine(g, plan, 0, split, seed)
    if metrics is not None:
        metrics.charge("fine_base", rounds)
    return _audit_proper(g, PaletteColoring(plan.palette, dict(sorted(colors.items()))), "fine_color")


def _split_branch(sub: Graph, eps_prime: float, config: SplitConfig, metrics: Optional[RunMetrics]) -> TwoColoring:
    needed = math.ceil(config.high_degree_constant * log_levels(sub.m, config) / eps_prime ** 2)
    if sub.max_degree >= needed:
        return balanced_split_high(sub, eps_prime, config, metrics)
    # branches below their own high-degree threshold split directly
    return balanced_split_low(sub, eps_prime, config, strict=False, metrics=metrics)


def _fine(g: Graph, plan: FinePlan, level: int, split: Splitter, seed: int) -> tuple[dict[int, int], int]:
    if g.m == 0:
        return {}, 0
    if g.max_degree > plan.degrees[level]:
        raise InvariantViolation(f"branch at depth {level} has degree {g.max_degree} > {plan.degrees[level]}",
                                 witness=level)
    if level == plan.depth:
        local = RunMetrics()
        return dict(base_color(g, seed, local).color), local.rounds

    halves = split(g, plan.eps_prime)
    block = base_palette(plan.degrees[-1]) * 2 ** (plan.depth - level - 1)
    colors: dict[int, int] = {}
    rounds = 0
    for offset, side in enumerate((Color.RED, Color.BLUE)):
        members = [eid for eid, c in halves.color.items() if c is side]
        if not members:
            continue
        sub = edge_subgraph(g, members)
        sub_colors, sub_rounds = _fine(sub.graph, plan, level + 1, split, derive_seed(seed, level, offset))
        rounds = max(rounds, sub_rounds)
        for eid, c in sub_colors.items():
            colors[sub.edge_map[eid]] = offset * block + c
    return colors, rounds


# --- randomized shattering ---------------------------------------------------------------------

class _PartitionProgram(NodeProgram):
    """Edge owners draw one of x classes; a node is Type I when some class
    degree reaches the bound, Type II when a neighbor is Type I."""

    name = "partition"

    def __init__(self, classes: int, bound: float):
        self.classes = classes
        self.bound = bound

    def init(self, ctx: StepContext) -> Step:
        u = ctx.view.node
        drawn = {}
        for eid, other in ctx.view.incident:
            if other is None or u < other:
                drawn[eid] = int(ctx.rng.integers(self.classes))
        return Step({"classes": drawn}, {eid: drawn[eid] for eid, _ in ctx.view.full_edges() if eid in drawn})

    def step(self, state, inbox, ctx: StepContext) -> Step:
        if ctx.round == 1:
            state["classes"].update(inbox)
            counts = [0] * self.classes
            for cls in state["classes"].values():
                counts[cls] += 1
            state["type_one"] = any(c >= self.bound for c in counts)
            return Step(state, {eid: state["type_one"] for eid, _ in ctx.view.full_edges()})
        state["type_two"] = not state["type_one"] and any(inbox.values())
        return Step(state, halted=True)


@dataclass(frozen=True)
class RandomizedPalette:
    x: int
    eps_prime: float
    block: int
    reserve: int

    @property
    def size(self) -> int:
        return self.x * self.block + self.reserve


def randomized_palette(delta: int, eps: float, config: ColoringConfig, x: Optional[int] = None) -> RandomizedPalette:
    eps_prime = eps / 4
    if x is None:
        x = max(1, math.floor(eps_prime ** 2 * delta / (config.x_constant * math.log(delta))))
    block = math.ceil(2 * (1 + eps_prime) * delta / x)
    return RandomizedPalette(x, eps_prime, block, math.floor(2 * (1 + eps_prime) * delta))


def randomized_color(
    g: Graph,
    eps: float,
    seed: int,
    config: Optional[ColoringConfig] = None,
    split_config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
    x: Optional[int] = None,
) -> PaletteColoring:
    loaded = load_algorithms_config()
    config = config or loaded.coloring
    split_config = split_config or loaded.split
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    delta = g.max_degree
    if delta < config.randomized_min_delta:
        raise PreconditionError(f"randomized coloring needs max degree >= {config.randomized_min_delta}, got {delta}")
    metrics = metrics if metrics is not None else RunMetrics()
    if delta >= config.fine_branch_constant * math.log(max(g.n, 2)) ** 2:
        logger.debug("randomized_color: delta %d is high for n=%d, using fine_color", delta, g.n)
        return fine_color(g, eps, derive_seed(seed, "fine"), split_config, metrics)
    plan = randomized_palette(delta, eps, config, x)

    bound = (1 + plan.eps_prime) * delta / plan.x
    states, partition = run(g, _PartitionProgram(plan.x, bound), max_rounds=2, seed=derive_seed(seed, "partition"))
    metrics.absorb(partition)
    type_one = {u for u, s in enumerate(states) if s["type_one"]}
    bad = type_one | {u for u, s in enumerate(states) if s["type_two"]}
    edge_class: dict[int, int] = {}
    for s in states:
        edge_class.update(s["classes"])

    colors: dict[int, int] = {}
    good_rounds = 0
    for cls in range(plan.x):
        members = [e.eid for e in g.edges
                   if edge_class[e.eid] == cls and not any(x_ in type_one for x_ in e.endpoints())]
        if not members:
            continue
        sub = edge_subgraph(g, members)
        local = RunMetrics()
        sub_coloring = base_color(sub.graph, derive_seed(seed, "class", cls), local)
        if sub_coloring.palette_size > plan.block:
            raise InvariantViolation(f"class {cls} needs {sub_coloring.palette_size} colors, block is {plan.block}",
                                     witness=cls)
        good_rounds = max(good_rounds, local.rounds)
        for eid, c in sub_coloring.color.items():
            colors[sub.edge_map[eid]] = cls * plan.block + c
    metrics.charge("good_classes", good_rounds)

    leftover = [e.eid for e in g.edges if e.eid not in colors]
    cap = config.bad_component_factor * delta ** 2 * math.log(max(g.n, 2))
    reserve_offset = plan.x * plan.block
    rest = edge_subgraph(g, leftover)
    sizes = []
    bad_rounds = 0
    component_of = {}
    pieces = components(rest.graph)
    for index, comp in enumerate(pieces):
        component_of.update({u: index for u in comp})
    members_of: dict[int, list[int]] = {}
    for e in rest.graph.edges:
        members_of.setdefault(component_of[e.u], []).append(e.eid)
    for index, comp in enumerate(pieces):
        original_nodes = [rest.node_map[u] for u in comp]
        sizes.append(len(comp))
        if len(comp) > cap:
            raise BadComponentTooLarge(f"bad component of {len(comp)} nodes exceeds cap {cap:.0f}", original_nodes)
        piece = edge_subgraph(rest.graph, members_of[index])
        local = RunMetrics()
        piece_coloring = fine_color(piece.graph, min(2 * plan.eps_prime, 0.99), derive_seed(seed, "bad", index),
                                    split_config, local)
        if piece_coloring.palette_size > plan.reserve:
            raise InvariantViolation(f"bad component needs {piece_coloring.palette_size} colors, "
                                     f"reserve is {plan.reserve}", witness=original_nodes)
        bad_rounds = max(bad_rounds, local.rounds)
        for eid, c in piece_coloring.color.items():
            colors[rest.edge_map[piece.edge_map[eid]]] = reserve_offset + c
    metrics.charge("bad_components", bad_rounds)
    metrics.max_bad_component = max(sizes, default=0)
    logger.debug("randomized_color: x=%d, %d bad nodes, largest component %d",
                 plan.x, len(bad), metrics.max_bad_component)
    return _audit_proper(g, PaletteColoring(plan.size, dict(sorted(colors.items()))), "randomized_color")
