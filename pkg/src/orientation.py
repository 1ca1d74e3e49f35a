"""
Low out-degree orientations and directed degree splitting.

The workhorse is a flow reducer: heavy nodes (out-degree above D) hang off a
source sentinel, light nodes (below D) feed a sink sentinel, and every round of
work flips a maximal set of edge-disjoint shortest source-to-sink paths. Each
flip lowers one heavy node by one and raises one light node by one, so a node
never drops below min(initial out-degree, D). bound_both_sides turns any
reducer with that property into an in/out bound by running it twice.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .artifacts import ForestDecomposition, Orientation, orient_by_id, require_complete
from .config import OrientationConfig, SplitConfig, load_algorithms_config
from .errors import (
    BudgetExceeded,
    ContractViolation,
    InvariantViolation,
    IterationCapExceeded,
    ParameterError,
    PreconditionError,
)
from .graph import Graph
from .luby import conflict_graph, maximal_independent_set
from .oracles import Contract, check
from .simulator import RunMetrics, derive_seed
from .splitting import log_levels

logger = logging.getLogger(__name__)

FlowMode = Literal["blocking-greedy", "luby-rounds"]
FLOW_MODES: tuple[str, ...] = ("blocking-greedy", "luby-rounds")

Reducer = Callable[[Graph, Orientation, int], Orientation]


@dataclass(frozen=True)
class DirectedPath:
    nodes: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def terminal(self) -> int:
        return self.nodes[-1]


def _out_arcs(g: Graph, direction: dict[int, tuple[int, Optional[int]]]) -> list[list[int]]:
    arcs: list[list[int]] = [[] for _ in g.nodes()]
    for eid in sorted(direction):
        tail, head = direction[eid]
        if head is not None:
            arcs[tail].append(eid)
    return arcs


def _flip(direction: dict, out: list[int], path: DirectedPath) -> None:
    for eid in path.edges:
        tail, head = direction[eid]
        direction[eid] = (head, tail)
        out[tail] -= 1
        out[head] += 1


def _accept(paths: list[DirectedPath]) -> list[DirectedPath]:
    """Edge-disjoint paths with distinct sources and distinct terminals, smallest source first."""
    accepted, sources, terminals, edges = [], set(), set(), set()
    for p in sorted(paths, key=lambda p: (p.source, p.edges)):
        if p.source in sources or p.terminal in terminals or edges.intersection(p.edges):
            continue
        accepted.append(p)
        sources.add(p.source)
        terminals.add(p.terminal)
        edges.update(p.edges)
    return accepted


# --- in/out wrapper -------------------------------------------------------------------------

def audit_half_property(before: Orientation, after: Orientation, n: int, bound: int) -> None:
    """out_after(u) >= min(out_before(u), D) and out_after(u) <= D for every node."""
    out_before = before.out_degrees(n)
    out_after = after.out_degrees(n)
    for u in range(n):
        if out_after[u] > bound:
            raise ContractViolation(f"node {u} left with out-degree {out_after[u]} > {bound}", node=u)
        if out_after[u] < min(out_before[u], bound):
            raise ContractViolation(
                f"node {u} dropped from out-degree {out_before[u]} to {out_after[u]} below min(., {bound})", node=u)


def bound_both_sides(
    g: Graph,
    inner: Reducer,
    bound: int,
    initial: Optional[Orientation] = None,
    strict: bool = True,
) -> Orientation:
    """Run inner, reverse every edge, run inner again: in- and out-degree <= bound."""
    if strict and bound < math.ceil((g.max_degree + 1) / 2):
        raise PreconditionError(f"bound {bound} < ceil((max degree + 1)/2) = {math.ceil((g.max_degree + 1) / 2)}")
    start = initial or orient_by_id(g)
    first = inner(g, start, bound)
    audit_half_property(start, first, g.n, bound)
    flipped = first.reversed()
    second = inner(g, flipped, bound)
    audit_half_property(flipped, second, g.n, bound)
    report = check(g, second, Contract(kind="in_out_bounds", d_in=bound, d_out=bound))
    if not report.passed:
        witness = report.failures()[0].witness
        node = witness.get("node", -1) if isinstance(witness, dict) else -1
        raise ContractViolation(f"in/out bound {bound} violated after both passes", node=node)
    return second


# --- flow reducer ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowIteration:
    index: int
    distance: int
    paths: int
    heavy: frozenset[int]
    light: frozenset[int]


@dataclass
class ArboricityTrace:
    bound: int
    mode: str
    iterations: list[FlowIteration] = field(default_factory=list)

    def distances_grow(self) -> bool:
        return all(it.distance >= 3 + it.index for it in self.iterations)

    def sets_shrink(self) -> bool:
        return all(later.heavy <= earlier.heavy and later.light <= earlier.light
                   for earlier, later in zip(self.iterations, self.iterations[1:]))

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "mode": self.mode,
            "iterations": [{"index": it.index, "distance": it.distance, "paths": it.paths,
                            "heavy": len(it.heavy), "light": len(it.light)} for it in self.iterations],
        }


def flow_iteration_cap(n: int, eps: float, config: OrientationConfig) -> int:
    return math.ceil(config.path_length_constant * math.log(max(n, 2)) / eps)


def _layers(g: Graph, arcs: list[list[int]], direction: dict, out: list[int], bound: int):
    """Level of every node below the source sentinel and the source-to-sink distance."""
    level: list[Optional[int]] = [None] * g.n
    queue = deque()
    for u in g.nodes():
        if out[u] > bound:
            level[u] = 1
            queue.append(u)
    while queue:
        u = queue.popleft()
        for eid in arcs[u]:
            head = direction[eid][1]
            if level[head] is None:
                level[head] = level[u] + 1
                queue.append(head)
    distance = min((level[u] + 1 for u in g.nodes() if level[u] is not None and out[u] < bound), default=None)
    return level, distance


def _level_arcs(g: Graph, arcs: list[list[int]], direction: dict, level: list, length: int) -> list[list[int]]:
    return [[eid for eid in arcs[u]
             if level[u] is not None and level[direction[eid][1]] == level[u] + 1
             and level[direction[eid][1]] <= length - 1]
            for u in g.nodes()]


def _blocking_paths(g, direction, out, bound, level, length, arcs) -> list[DirectedPath]:
    """Maximal edge-disjoint set of shortest paths by depth-first search with dead-arc retirement."""
    pointer = [0] * g.n
    excess = {u: out[u] - bound for u in g.nodes() if out[u] > bound}
    room = {u: bound - out[u] for u in g.nodes() if level[u] == length - 1 and out[u] < bound}
    paths = []
    for start in sorted(excess):
        while excess[start] > 0:
            stack, edges = [start], []
            found = False
            while stack:
                u = stack[-1]
                if level[u] == length - 1:
                    if room.get(u, 0) > 0:
                        found = True
                        break
                    stack.pop()
                    edges.pop()
                    pointer[stack[-1]] += 1
                    continue
                if pointer[u] < len(arcs[u]):
                    eid = arcs[u][pointer[u]]
                    stack.append(direction[eid][1])
                    edges.append(eid)
                    continue
                stack.pop()
                if edges:
                    edges.pop()
                    pointer[stack[-1]] += 1
            if not found:
                break
            for u in stack[:-1]:
                pointer[u] += 1
            excess[start] -= 1
            room[stack[-1]] -= 1
            paths.append(DirectedPath(tuple(stack), tuple(edges)))
    return paths


def _luby_paths(g, direction, out, bound, level, length, arcs, config, seed, metrics) -> list[DirectedPath]:
    """Maximal set built from rounds of Luby MIS over the path conflict graph."""
    if g.n > config.luby_max_nodes:
        raise BudgetExceeded(f"luby-rounds mode is capped at {config.luby_max_nodes} nodes, got {g.n}")
    excess = {u: out[u] - bound for u in g.nodes() if out[u] > bound}
    room = {u: bound - out[u] for u in g.nodes() if level[u] == length - 1 and out[u] < bound}
    used: set[int] = set()
    paths: list[DirectedPath] = []
    rounds = 0
    while True:
        candidates = _level_paths(arcs, direction, level, length, excess, room, used, config.luby_max_candidates)
        if not candidates:
            break
        groups: dict[tuple, list[int]] = {}
        for index, p in enumerate(candidates):
            for key in [("start", p.source), ("end", p.terminal)] + [("arc", eid) for eid in p.edges]:
                groups.setdefault(key, []).append(index)
        conflicts = {(a, b) for members in groups.values() for i, a in enumerate(members) for b in members[i + 1:]}
        chosen, mis = maximal_independent_set(conflict_graph(len(candidates), conflicts),
                                              seed=derive_seed(seed, length, rounds))
        metrics.charge("flow.luby", mis.rounds * length)
        for index in chosen:
            p = candidates[index]
            paths.append(p)
            used.update(p.edges)
            excess[p.source] -= 1
            room[p.terminal] -= 1
        rounds += 1
    return paths


def _level_paths(arcs, direction, level, length, excess, room, used, cap) -> list[DirectedPath]:
    found: list[DirectedPath] = []

    def extend(nodes: list[int], edges: list[int]) -> None:
        u = nodes[-1]
        if level[u] == length - 1:
            if room.get(u, 0) > 0:
                if len(found) >= cap:
                    raise BudgetExceeded(f"more than {cap} candidate paths of length {length}")
                found.append(DirectedPath(tuple(nodes), tuple(edges)))
            return
        for eid in arcs[u]:
            if eid not in used:
                extend(nodes + [direction[eid][1]], edges + [eid])

    for start in sorted(u for u, left in excess.items() if left > 0):
        extend([start], [])
    return found


def reduce_out_degree(
    g: Graph,
    initial: Orientation,
    bound: int,
    eps: float,
    mode: FlowMode = "blocking-greedy",
    seed: int = 0,
    config: Optional[OrientationConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> tuple[Orientation, ArboricityTrace]:
    config = config or load_algorithms_config().orientation
    if mode not in FLOW_MODES:
        raise ParameterError(f"unknown flow mode {mode!r}; expected one of {', '.join(FLOW_MODES)}")
    require_complete(g, initial)
    metrics = metrics if metrics is not None else RunMetrics()
    direction = dict(initial.direction)
    out = initial.out_degrees(g.n)
    cap = flow_iteration_cap(g.n, eps, config)
    trace = ArboricityTrace(bound, mode)
    index = 0
    last_distance = 0
    while True:
        heavy = frozenset(u for u in g.nodes() if out[u] > bound)
        if not heavy:
            break
        light = frozenset(u for u in g.nodes() if out[u] < bound)
        if trace.iterations:
            previous = trace.iterations[-1]
            if not (heavy <= previous.heavy and light <= previous.light):
                raise InvariantViolation("heavy or light set grew between iterations", witness=index)
        arcs = _out_arcs(g, direction)
        level, distance = _layers(g, arcs, direction, out, bound)
        if distance is None:
            raise InvariantViolation(f"no augmenting path for {len(heavy)} heavy node(s) at D={bound}",
                                     witness=min(heavy))
        if distance < 3 + index or distance <= last_distance:
            raise InvariantViolation(f"distance {distance} at iteration {index} after {last_distance}", witness=index)
        last_distance = distance
        if index > cap:
            raise InvariantViolation(f"{len(heavy)} heavy node(s) remain past {cap} iterations at D={bound}",
                                     witness=min(heavy))

        level_arcs = _level_arcs(g, arcs, direction, level, distance)
        metrics.charge("flow.layers", distance)
        if mode == "blocking-greedy":
            paths = _blocking_paths(g, direction, out, bound, level, distance, level_arcs)
            metrics.charge("flow.augment", distance)
        else:
            paths = _luby_paths(g, direction, out, bound, level, distance, level_arcs, config,
                                derive_seed(seed, index), metrics)

        before = list(out)
        for p in paths:
            _flip(direction, out, p)
        _audit_conservation(before, out, paths, bound)
        trace.iterations.append(FlowIteration(index, distance, len(paths), heavy, light))
        logger.debug("flow iteration %d: distance %d, %d paths, %d heavy", index, distance, len(paths), len(heavy))
        index += 1
    return Orientation(direction), trace


def _audit_conservation(before: list[int], after: list[int], paths: list[DirectedPath], bound: int) -> None:
    expected = list(before)
    for p in paths:
        expected[p.source] -= 1
        expected[p.terminal] += 1
    for u, (want, got) in enumerate(zip(expected, after)):
        if want != got:
            raise InvariantViolation(f"node {u} out-degree {got}, augmentation implies {want}", witness=u)
        if before[u] > bound > got or before[u] < bound < got:
            raise InvariantViolation(f"node {u} crossed the bound {bound}", witness=u)


def arboricity_orient(
    g: Graph,
    a: int,
    eps: float,
    mode: FlowMode = "blocking-greedy",
    seed: int = 0,
    config: Optional[OrientationConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> tuple[Orientation, ArboricityTrace]:
    """Orientation with out-degree <= ceil((1+eps)a) for a graph of arboricity <= a."""
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if a < 1:
        raise ParameterError(f"arboricity bound must be >= 1, got {a}")
    bound = math.ceil((1 + eps) * a)
    orientation, trace = reduce_out_degree(g, orient_by_id(g), bound, eps, mode, seed, config, metrics)
    if max(orientation.out_degrees(g.n), default=0) > bound:
        raise InvariantViolation(f"out-degree above {bound} after the flow reducer")
    return orientation, trace


def directed_split_randomized(
    g: Graph,
    eps: float,
    mode: FlowMode = "blocking-greedy",
    seed: int = 0,
    config: Optional[OrientationConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> Orientation:
    """In- and out-degree <= ceil((1+eps)*delta/2)."""
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if g.m == 0:
        return Orientation({})
    bound = math.ceil((1 + eps) * g.max_degree / 2)
    passes = iter(range(2))

    def inner(graph: Graph, start: Orientation, d: int) -> Orientation:
        orientation, _ = reduce_out_degree(graph, start, d, eps, mode, derive_seed(seed, next(passes)),
                                           config, metrics)
        return orientation

    return bound_both_sides(g, inner, bound)


# --- deterministic directed split ------------------------------------------------------------

@dataclass
class _Token:
    source: int
    position: int
    trace: tuple[tuple[int, int, int], ...] = ()
    paused: bool = False

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(eid for _, eid, _ in self.trace)


def _directed_token_search(
    g: Graph,
    direction: dict,
    out: list[int],
    t: int,
    eps: float,
    config: SplitConfig,
    metrics: Optional[RunMetrics],
) -> list[DirectedPath]:
    """Tokens walk out-arcs from every node of out-degree t until they reach a node
    of out-degree <= t-2, in the level structure of the undirected search."""
    active = [u for u in g.nodes() if out[u] == t]
    if not active:
        return []
    arcs = _out_arcs(g, direction)
    log_m = log_levels(g.m, config)
    level_count = max(1, math.ceil(log_m))
    level_budget = max(0, math.floor((2 * t - g.max_degree - 2) / log_m))
    h = math.ceil(config.step_multiplier * log_m ** 2 / eps)

    used: set[int] = set()
    tokens = {s: [_Token(s, s)] for s in active}
    found: dict[int, DirectedPath] = {}
    quota = 1
    for level in range(1, level_count + 1):
        live = sorted(tokens)
        if not live:
            break
        budget: dict[int, int] = {}
        for _ in range(h):
            if not _directed_step(arcs, direction, out, t, tokens, found, used, budget, level_budget):
                break
        if metrics is not None:
            metrics.charge("tokens", h)
            metrics.charge("backtrack", level * h)
        quota_next = 2 * math.ceil(3 * quota / 4)
        for s in live:
            if s in found or len(tokens[s]) < quota_next:
                del tokens[s]
                continue
            kept = sorted(tokens[s], key=lambda tk: tk.key)[:quota_next]
            for token in kept:
                token.paused = False
            tokens[s] = kept
        quota = quota_next
    return [found[s] for s in sorted(found)]


def _directed_step(arcs, direction, out, t, tokens, found, used, budget, level_budget) -> bool:
    requests: dict[int, list[_Token]] = {}
    for s, own in tokens.items():
        if s in found:
            continue
        for token in own:
            if not token.paused:
                requests.setdefault(token.position, []).append(token)
    if not requests:
        return False

    moved = False
    arrivals: dict[int, list[_Token]] = {}
    for u in sorted(requests):
        queue = sorted(requests[u], key=lambda tk: (tk.source, tk.key))
        free = [eid for eid in arcs[u] if eid not in used]
        grants = [[free.pop(0)] if free else [] for _ in queue]
        doubles = min(len(queue), budget.get(u, level_budget))
        for granted in grants:
            if doubles == 0 or not free:
                break
            if granted:
                granted.append(free.pop(0))
                doubles -= 1
                budget[u] = budget.get(u, level_budget) - 1
        for token, granted in zip(queue, grants):
            if not granted:
                continue
            moved = True
            tokens[token.source].remove(token)
            for eid in granted:
                used.add(eid)
                head = direction[eid][1]
                child = _Token(token.source, head, token.trace + ((u, eid, head),), paused=len(granted) == 2)
                arrivals.setdefault(token.source, []).append(child)

    for s, arrived in arrivals.items():
        for child in sorted(arrived, key=lambda tk: tk.key):
            if out[child.position] <= t - 2:
                if s not in found:
                    nodes = (s,) + tuple(to for _, _, to in child.trace)
                    found[s] = DirectedPath(nodes, child.key)
                continue
            tokens[s].append(child)
    return moved


def _token_reduce(
    g: Graph,
    initial: Orientation,
    bound: int,
    eps: float,
    config: SplitConfig,
    metrics: Optional[RunMetrics],
) -> Orientation:
    direction = dict(initial.direction)
    out = initial.out_degrees(g.n)
    cap = max(1, math.ceil(config.iteration_cap_factor * max(g.max_degree, 1) * math.log(max(g.n, 2))))
    for t in range(max(out, default=0), bound, -1):
        current = [u for u in g.nodes() if out[u] == t]
        searches = 0
        while current:
            if searches >= cap:
                raise IterationCapExceeded(f"{len(current)} node(s) at out-degree {t} after {cap} searches",
                                           residual_sources=len(current))
            accepted = _accept(_directed_token_search(g, direction, out, t, eps, config, metrics))
            if not accepted:
                raise IterationCapExceeded(f"no augmenting path for {len(current)} node(s) at out-degree {t}",
                                           residual_sources=len(current))
            before = list(out)
            for p in accepted:
                _flip(direction, out, p)
            for u in g.nodes():
                if before[u] <= bound and out[u] < before[u]:
                    raise InvariantViolation(f"node {u} at out-degree {before[u]} <= {bound} was reduced",
                                             witness=u)
                if out[u] > t:
                    raise InvariantViolation(f"node {u} pushed above out-degree {t}", witness=u)
            remaining = [u for u in g.nodes() if out[u] == t]
            if len(remaining) >= len(current):
                raise InvariantViolation(f"augmentation at out-degree {t} did not shrink the sources",
                                         witness=remaining[:1])
            current = remaining
            searches += 1
        logger.debug("out-degree <= %d after token augmentation", t - 1)
    return Orientation(direction)


def directed_split_deterministic(
    g: Graph,
    eps: float,
    config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> Orientation:
    """In- and out-degree <= floor((1+eps)*delta/2) by token augmentation along out-arcs."""
    config = config or load_algorithms_config().split
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if g.m == 0:
        return Orientation({})
    log_m = log_levels(g.m, config)
    if eps <= config.regime_constant * log_m / g.max_degree:
        raise ParameterError(
            f"eps={eps} is at most {config.regime_constant}*log(m)/delta = "
            f"{config.regime_constant * log_m / g.max_degree:.3f}; use directed_split_randomized")
    bound = math.floor((1 + eps) * g.max_degree / 2)
    return bound_both_sides(g, lambda graph, start, d: _token_reduce(graph, start, d, eps, config, metrics), bound)


# --- forests -------------------------------------------------------------------------------

def pseudoforest_decompose(g: Graph, orientation: Orientation) -> list[list[int]]:
    """Slot j holds every node's j-th out-edge in edge-id order; each slot has out-degree <= 1."""
    require_complete(g, orientation)
    by_tail: dict[int, list[int]] = {}
    for eid in sorted(orientation.direction):
        by_tail.setdefault(orientation.direction[eid][0], []).append(eid)
    width = max((len(v) for v in by_tail.values()), default=0)
    slots: list[list[int]] = [[] for _ in range(width)]
    for eids in by_tail.values():
        for j, eid in enumerate(eids):
            slots[j].append(eid)
    return [sorted(s) for s in slots]


def split_pseudoforest(direction: dict, eids: list[int]) -> tuple[list[int], list[int]]:
    """Break every cycle of an out-degree-1 edge set at its smallest edge id.

    Returns (forest, removed); the removed edges take one edge per cycle and so
    form a forest of their own.
    """
    successor = {}
    for eid in eids:
        tail, head = direction[eid]
        successor[tail] = (eid, head)
    finished: set[int] = set()
    removed: set[int] = set()
    for start in sorted(successor):
        walk: list[int] = []
        on_walk: dict[int, int] = {}
        u: Optional[int] = start
        while u is not None and u in successor and u not in finished and u not in on_walk:
            on_walk[u] = len(walk)
            walk.append(u)
            u = successor[u][1]
        if u is not None and u in on_walk:
            removed.add(min(successor[x][0] for x in walk[on_walk[u]:]))
        finished.update(walk)
    return sorted(set(eids) - removed), sorted(removed)


def forest_decompose(
    g: Graph,
    orientation: Orientation,
    a: int,
    eps: float,
    seed: int = 0,
    config: Optional[OrientationConfig] = None,
    metrics: Optional[RunMetrics] = None,
    strict: bool = True,
) -> ForestDecomposition:
    """Star forests from random activation plus leftover forests; at most a(1+8eps) forests.

    With strict=False the size precondition on a and the forest-count bound are
    not enforced; acyclicity and the star property still are.
    """
    config = config or load_algorithms_config().orientation
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if a < 1:
        raise ParameterError(f"a must be >= 1, got {a}")
    needed = config.forest_constant * math.log(max(g.n, 2)) / eps ** 2
    if strict and a < needed:
        raise PreconditionError(f"a={a} is below {config.forest_constant}*ln(n)/eps^2 = {needed:.1f}")
    require_complete(g, orientation)
    slots = math.ceil((1 + eps) * a)
    top = max(orientation.out_degrees(g.n), default=0)
    if top > slots:
        raise PreconditionError(f"orientation has out-degree {top} > ceil((1+eps)a) = {slots}")

    limit = math.floor(a * (1 + 8 * eps))
    witness: object = None
    for attempt in range(config.forest_retries):
        rng = np.random.default_rng(derive_seed(seed, "activate", attempt))
        decomposition, witness = _decompose_once(g, orientation, slots, (1 - eps) / (1 + eps), rng)
        if decomposition is None:
            logger.debug("forest attempt %d: node %s found no inactive endpoint", attempt, witness)
            continue
        if strict and decomposition.forests > limit:
            witness = decomposition.forests
            logger.debug("forest attempt %d: %d forests > %d", attempt, decomposition.forests, limit)
            continue
        report = check(g, decomposition, Contract(kind="forests", star=True))
        if not report.passed:
            raise InvariantViolation("forest decomposition failed its audit", witness=report.failures()[0].witness)
        if metrics is not None:
            metrics.charge("forest_primary", 1)
        return decomposition
    raise InvariantViolation(f"forest decomposition failed {config.forest_retries} attempts", witness=witness)


def _decompose_once(g: Graph, orientation: Orientation, slots: int, q: float, rng: np.random.Generator):
    active = rng.random((g.n, slots)) < q
    by_tail: dict[int, list[int]] = {u: [] for u in g.nodes()}
    for eid in sorted(orientation.direction):
        by_tail[orientation.direction[eid][0]].append(eid)

    forest_of: dict[int, int] = {}
    leftover: dict[int, list[int]] = {}
    for u in g.nodes():
        remaining = list(by_tail[u])
        dummies = slots - len(remaining)
        for f in np.flatnonzero(active[u]):
            pick = next((eid for eid in remaining
                         if orientation.direction[eid][1] is None or not active[orientation.direction[eid][1], f]),
                        None)
            if pick is None:
                if dummies == 0:
                    return None, u
                dummies -= 1
                continue
            remaining.remove(pick)
            forest_of[pick] = int(f)
        leftover[u] = remaining

    forests = slots
    width = max((len(v) for v in leftover.values()), default=0)
    for j in range(width):
        slot = sorted(v[j] for v in leftover.values() if len(v) > j)
        kept, removed = split_pseudoforest(orientation.direction, slot)
        for eid in kept:
            forest_of[eid] = forests
        forests += 1
        if removed:
            for eid in removed:
                forest_of[eid] = forests
            forests += 1
    star_flags = tuple(index < slots for index in range(forests))
    counts = tuple(int(c) for c in active.sum(axis=1))
    return ForestDecomposition(dict(sorted(forest_of.items())), forests, star_flags, counts), None
