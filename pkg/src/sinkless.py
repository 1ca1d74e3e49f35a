"""
Sinkless orientation.

pre_shatter is the randomized marking phase: it leaves small components of bad
nodes, and the deterministic short-cycle algorithm finishes them.
sinkless_low_degree and the high-degree path handle irregular inputs, and
sinkless_dispatch picks a strategy from the degree profile.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .artifacts import Orientation
from .config import SinklessConfig, load_algorithms_config
from .errors import BudgetExceeded, InvariantViolation, PreconditionError, RoundLimitExceeded
from .graph import Graph, Subgraph, components, induced
from .luby import maximal_independent_set
from .oracles import Contract, check
from .simulator import NodeProgram, RunMetrics, Step, StepContext, derive_seed, gather_ball, run

logger = logging.getLogger(__name__)

Direction = tuple[int, Optional[int]]


# --- short cycles ------------------------------------------------------------------

@dataclass(frozen=True)
class ShortCycle:
    """A simple cycle in its preferred traversal: starts at the smallest edge id,
    which is walked from its lower id endpoint to the higher."""

    eids: tuple[int, ...]
    nodes: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.eids)

    @property
    def key(self) -> tuple[int, ...]:
        """Least rotation of the edge ids over both traversal directions."""
        forward = self.eids
        backward = (self.eids[0],) + tuple(reversed(self.eids[1:]))
        return min(forward, backward)

    def direction_of(self, eid: int) -> Direction:
        i = self.eids.index(eid)
        return self.nodes[i], self.nodes[(i + 1) % len(self.nodes)]

    @classmethod
    def from_walk(cls, steps: list[tuple[int, int, int]]) -> "ShortCycle":
        first = min(range(len(steps)), key=lambda i: steps[i][0])
        _, a, b = steps[first]
        if a > b:
            steps = [(e, y, x) for e, x, y in reversed(steps)]
            first = len(steps) - 1 - first
        ordered = steps[first:] + steps[:first]
        return cls(tuple(e for e, _, _ in ordered), tuple(x for _, x, _ in ordered))


Adjacency = dict[int, list[tuple[int, int]]]
WalkStep = tuple[int, int, int]

_FAR = 1 << 30


def full_adjacency(g: Graph) -> Adjacency:
    return {u: [(eid, w) for eid, w in g.adjacency(u) if w is not None] for u in g.nodes()}


def _hops(adj: Adjacency, source: int, depth: int, skip: int = -1, floor: int = -1) -> dict[int, int]:
    """BFS distances up to `depth` over edges with id above `floor`, never using `skip`."""
    dist = {source: 0}
    frontier = [source]
    while frontier and dist[frontier[0]] < depth:
        nxt = []
        for x in frontier:
            for e, y in adj.get(x, ()):
                if e == skip or e <= floor or y in dist:
                    continue
                dist[y] = dist[x] + 1
                nxt.append(y)
        frontier = nxt
    return dist


class CycleIndex:
    """Edge-id sorted adjacency plus cached distances, shared by searches on one graph."""

    def __init__(self, adj: Adjacency):
        self.adj = {x: sorted(ns) for x, ns in adj.items()}
        self.ends: dict[int, tuple[int, int]] = {}
        for x, ns in self.adj.items():
            for e, y in ns:
                self.ends[e] = (min(x, y), max(x, y))
        self._toward: dict[tuple[int, int, int], dict[int, int]] = {}

    def toward(self, start: int, low: int, depth: int) -> dict[int, int]:
        key = (start, low, depth)
        if key not in self._toward:
            self._toward[key] = _hops(self.adj, start, depth, floor=low)
        return self._toward[key]


class _LeastCycleSearch:
    """Depth-first search over walks in edge-id order. A cycle is written from its
    smallest edge, in the direction whose second edge is smaller, so the first
    closed walk found is the lexicographically least canonical cycle."""

    def __init__(self, index: CycleIndex, eid: int, u: int, v: int, limit: int, cap: int):
        self.index = index
        self.eid, self.u, self.v = eid, u, v
        self.limit = limit
        self.cap = cap
        self.expanded = 0
        self.to_u = _hops(index.adj, u, limit, skip=eid)
        self.to_v = _hops(index.adj, v, limit, skip=eid)

    def run(self) -> Optional[ShortCycle]:
        if self.to_u.get(self.v, _FAR) > self.limit - 1:
            return None
        reach = (self.limit - 2) // 2
        for low in sorted(self.index.ends):
            if low > self.eid:
                break
            if low != self.eid and not self._near(low, reach):
                continue
            walk = self._least_with(low)
            if walk is not None:
                return ShortCycle.from_walk(walk)
        return None

    def _near(self, low: int, reach: int) -> bool:
        return any(min(self.to_u.get(x, _FAR), self.to_v.get(x, _FAR)) <= reach
                   for x in self.index.ends[low])

    def _least_with(self, low: int) -> Optional[list[WalkStep]]:
        a, b = self.index.ends[low]
        options = []
        for cur, start in ((b, a), (a, b)):
            toward = self.index.toward(start, low, self.limit)
            for f, y in self.index.adj.get(cur, ()):
                if f > low:
                    options.append((f, y, cur, start, toward))
        options.sort(key=lambda option: option[0])
        for f, y, cur, start, toward in options:
            walk = self._walk([(low, start, cur)], f, y, toward)
            if walk is not None:
                return walk
        return None

    def _walk(
        self, steps: list[WalkStep], f: int, y: int, toward: dict[int, int]
    ) -> Optional[list[WalkStep]]:
        low, start, first = steps[0]
        visited = {start, first}
        used = [low == self.eid]
        frames = [iter(((f, y),))]
        while frames:
            option = next(frames[-1], None)
            if option is None:
                frames.pop()
                _, _, head = steps.pop()
                visited.discard(head)
                used.pop()
                continue
            e, z = option
            cur = steps[-1][2]
            if len(steps) >= self.limit:
                continue
            if z == start:
                if (used[-1] or e == self.eid) and (len(steps) == 1 or steps[1][0] < e):
                    return steps + [(e, cur, z)]
                continue
            if z in visited:
                continue
            now = used[-1] or e == self.eid
            left = self.limit - len(steps) - 1
            if now:
                bound = toward.get(z, _FAR)
            else:
                bound = min(self.to_u.get(z, _FAR) + 1 + toward.get(self.v, _FAR),
                            self.to_v.get(z, _FAR) + 1 + toward.get(self.u, _FAR))
            if bound > left:
                continue
            self.expanded += 1
            if self.expanded > self.cap:
                raise BudgetExceeded(f"cycle search through edge {self.eid} passed {self.cap} steps")
            steps.append((e, cur, z))
            visited.add(z)
            used.append(now)
            frames.append(iter([(h, w) for h, w in self.index.adj.get(z, ()) if h > low]))
        return None


def least_short_cycle(
    adj: Adjacency, eid: int, u: int, v: int, limit: int, cap: int, index: Optional[CycleIndex] = None
) -> Optional[ShortCycle]:
    """Least cycle through edge (u, v) with at most `limit` edges, comparing the
    canonical edge-id sequences lexicographically; None if the edge lies on no
    such cycle."""
    if limit < 2:
        return None
    return _LeastCycleSearch(index or CycleIndex(adj), eid, u, v, limit, cap).run()


def short_cycle_choices(g: Graph, limit: int, cap: int = 200_000) -> dict[int, ShortCycle]:
    """For every full edge on a cycle of length <= limit, the least such cycle."""
    adj = full_adjacency(g)
    index = CycleIndex(adj)
    choices = {}
    for edge in g.edges:
        if edge.v is None:
            continue
        cycle = least_short_cycle(adj, edge.eid, edge.u, edge.v, limit, cap, index)
        if cycle is not None:
            choices[edge.eid] = cycle
    return choices


def cycle_length_bound(n: int, d: int) -> int:
    """Cycles with at most floor(2 log_{d-1} N + 1) edges are short."""
    if n <= 1:
        return 1
    if d < 3:
        return n
    return math.floor(2 * math.log(n) / math.log(d - 1) + 1)


# --- engine programs ---------------------------------------------------------------

class _DistanceFlood(NodeProgram):
    """BFS from satisfied nodes; a node records the smallest edge id toward a
    neighbor one step closer."""

    name = "flood"

    def init(self, ctx: StepContext) -> Step:
        if ctx.view.input:
            return Step((0, None), {eid: 0 for eid, _ in ctx.view.full_edges()}, halted=True)
        return Step((None, None))

    def step(self, state, inbox, ctx: StepContext) -> Step:
        if not inbox:
            return Step(state)
        dist = min(inbox.values()) + 1
        parent = min(eid for eid, d in inbox.items() if d == dist - 1)
        return Step((dist, parent), {eid: dist for eid, _ in ctx.view.full_edges()}, halted=True)


class _MarkProgram(NodeProgram):
    """The owner of an edge (its lower id endpoint, or the sole endpoint of a
    half-edge) marks it and picks a direction."""

    name = "mark"

    def __init__(self, probability: float):
        self.probability = probability

    def init(self, ctx: StepContext) -> Step:
        u = ctx.view.node
        decisions: dict[int, tuple[bool, int]] = {}
        outbox = {}
        for eid, other in ctx.view.incident:
            if other is not None and other < u:
                continue
            marked = bool(ctx.rng.random() < self.probability)
            if other is None:
                tail = u
            else:
                tail = u if ctx.rng.random() < 0.5 else other
            decisions[eid] = (marked, tail)
            if other is not None:
                outbox[eid] = decisions[eid]
        return Step(decisions, outbox)

    def step(self, state, inbox, ctx: StepContext) -> Step:
        state.update(inbox)
        return Step(state, halted=True)


class _ClassifyProgram(NodeProgram):
    name = "classify"

    def init(self, ctx: StepContext) -> Step:
        type_one = ctx.view.input
        return Step(type_one, {eid: type_one for eid, _ in ctx.view.full_edges()})

    def step(self, state, inbox, ctx: StepContext) -> Step:
        return Step((state, any(inbox.values())), halted=True)


class _RandomOrientProgram(NodeProgram):
    name = "random_orient"

    def init(self, ctx: StepContext) -> Step:
        u = ctx.view.node
        chosen = {}
        for eid, other in ctx.view.incident:
            if other is None:
                chosen[eid] = (u, None)
            elif u < other:
                chosen[eid] = (u, other) if ctx.rng.random() < 0.5 else (other, u)
        return Step(chosen, {eid: chosen[eid] for eid, other in ctx.view.full_edges() if eid in chosen})

    def step(self, state, inbox, ctx: StepContext) -> Step:
        state.update(inbox)
        return Step(state, halted=True)


def _is_sinkless(g: Graph, direction: dict[int, Direction]) -> bool:
    out = [0] * g.n
    for tail, _ in direction.values():
        out[tail] += 1
    return all(out)


def _verified(g: Graph, direction: dict[int, Direction], stage: str) -> Orientation:
    out = [0] * g.n
    for tail, _ in direction.values():
        out[tail] += 1
    sink = next((u for u in g.nodes() if out[u] == 0), None)
    if len(direction) != g.m or sink is not None:
        raise InvariantViolation(f"{stage} produced a non-sinkless orientation", witness=sink)
    return Orientation(dict(sorted(direction.items())))


# --- pre-shattering -----------------------------------------------------------------

@dataclass
class ShatterResult:
    partial: Orientation
    marked: frozenset[int]
    bad: dict[int, str]
    residual: Subgraph
    component_sizes: list[int]
    delta: int
    metrics: RunMetrics = field(default_factory=RunMetrics)

    @property
    def max_bad_component(self) -> int:
        return max(self.component_sizes, default=0)


def pre_shatter(g: Graph, seed: int, config: Optional[SinklessConfig] = None) -> ShatterResult:
    config = config or load_algorithms_config().sinkless
    if not g.is_regular():
        raise PreconditionError(f"pre_shatter needs a regular graph (degrees {g.min_degree}..{g.max_degree})")
    delta = g.max_degree
    metrics = RunMetrics()

    decisions, mark_metrics = run(g, _MarkProgram(config.mark_probability), max_rounds=1,
                                  seed=derive_seed(seed, "mark"))
    metrics.absorb(mark_metrics)
    marked_count = [0] * g.n
    has_out = [False] * g.n
    for u in g.nodes():
        for eid, _ in g.adjacency(u):
            is_marked, tail = decisions[u][eid]
            if is_marked:
                marked_count[u] += 1
                if tail == u:
                    has_out[u] = True

    inputs = [marked_count[u] > delta / 2 for u in g.nodes()]
    tags, classify_metrics = run(g, _ClassifyProgram(), max_rounds=1, seed=seed, inputs=inputs)
    metrics.absorb(classify_metrics)
    bad: dict[int, str] = {}
    for u, (type_one, near_type_one) in enumerate(tags):
        if type_one:
            bad[u] = "I"
        elif near_type_one:
            bad[u] = "II"
        elif not has_out[u]:
            bad[u] = "III"

    marked = set()
    partial: dict[int, Direction] = {}
    for edge in g.edges:
        is_marked, tail = decisions[edge.u][edge.eid]
        if is_marked and not any(bad.get(x) == "I" for x in edge.endpoints()):
            marked.add(edge.eid)
            partial[edge.eid] = (tail, edge.other(tail))
        elif not any(x in bad for x in edge.endpoints()):
            partial[edge.eid] = (edge.u, None) if edge.v is None else (min(edge.u, edge.v), max(edge.u, edge.v))

    residual_g = Graph(g.n, [(i, e.u, e.v) for i, e in enumerate(
        e for e in g.edges if e.eid not in marked)])
    kept = [e.eid for e in g.edges if e.eid not in marked]
    sub = induced(residual_g, bad, boundary="half")
    residual = Subgraph(sub.graph, sub.node_map, tuple(kept[i] for i in sub.edge_map))
    sizes = sorted((len(c) for c in components(residual.graph)), reverse=True)
    metrics.max_bad_component = max(sizes, default=0)
    logger.debug("pre_shatter: %d bad nodes, largest component %d", len(bad), metrics.max_bad_component)
    return ShatterResult(Orientation(partial), frozenset(marked), bad, residual, sizes, delta, metrics)


def bad_component_report(result: ShatterResult, n: int) -> dict:
    """Component sizes against the delta^2 ln n scale used for calibration."""
    scale = result.delta ** 2 * math.log(max(n, 2))
    return {
        "bad_nodes": len(result.bad),
        "components": len(result.component_sizes),
        "max_component": result.max_bad_component,
        "ratio": result.max_bad_component / scale,
        "types": {t: sum(1 for tag in result.bad.values() if tag == t) for t in ("I", "II", "III")},
    }


# --- deterministic short-cycle algorithm ----------------------------------------------------

def _orient_component(
    g: Graph, limit: int, config: SinklessConfig, seed: int
) -> tuple[dict[int, Direction], int]:
    """Sinkless orientation of a connected graph whose every component has a
    cycle of length <= limit or a half-edge. Returns directions and rounds."""
    direction: dict[int, Direction] = {}
    for edge in g.half_edges():
        direction[edge.eid] = (edge.u, None)
    if g.n <= config.gather_limit:
        choices, rounds = _short_edges_by_gathering(g, limit, config, seed)
    else:
        choices = short_cycle_choices(g, limit, config.cycle_enumeration_cap)
        rounds = limit
    for eid, cycle in choices.items():
        direction[eid] = cycle.direction_of(eid)

    satisfied = [False] * g.n
    for eid in direction:
        for x in g.edge(eid).endpoints():
            satisfied[x] = True
    if not all(satisfied):
        try:
            states, flood = run(g, _DistanceFlood(), max_rounds=g.n, seed=seed, inputs=satisfied)
        except RoundLimitExceeded as exc:
            stuck = next(u for u, (dist, _) in enumerate(exc.partial_states) if dist is None)
            raise InvariantViolation(f"node {stuck} cannot reach a short cycle or half-edge", witness=stuck) from exc
        rounds += flood.rounds + 1
        for u, (_, parent) in enumerate(states):
            if parent is not None:
                direction[parent] = (u, g.edge(parent).other(u))
    for edge in g.edges:
        if edge.eid not in direction:
            direction[edge.eid] = (min(edge.u, edge.v), max(edge.u, edge.v))
    return direction, rounds


def _short_edges_by_gathering(
    g: Graph, limit: int, config: SinklessConfig, seed: int
) -> tuple[dict[int, ShortCycle], int]:
    views, metrics = gather_ball(g, limit, seed=seed)
    choices: dict[int, ShortCycle] = {}
    for view in views:
        adj: Adjacency = {}
        for edge in view.edges:
            if edge.v is not None:
                adj.setdefault(edge.u, []).append((edge.eid, edge.v))
                adj.setdefault(edge.v, []).append((edge.eid, edge.u))
        index = CycleIndex(adj)
        for eid, other in g.adjacency(view.center):
            if other is None:
                continue
            cycle = least_short_cycle(adj, eid, view.center, other, limit, config.cycle_enumeration_cap, index)
            if cycle is None:
                continue
            if eid in choices and choices[eid] != cycle:
                raise InvariantViolation(f"endpoints of edge {eid} disagree on its cycle", witness=eid)
            choices[eid] = cycle
    return choices, metrics.rounds


def deterministic_sinkless(
    g: Graph,
    d: int,
    config: Optional[SinklessConfig] = None,
    metrics: Optional[RunMetrics] = None,
    seed: int = 0,
) -> Orientation:
    config = config or load_algorithms_config().sinkless
    if d < 3:
        raise PreconditionError(f"deterministic sinkless orientation needs d >= 3, got {d}")
    low = next((u for u in g.nodes() if g.degree(u) < d), None)
    if low is not None:
        raise PreconditionError(f"node {low} has {g.degree(low)} edges-or-half-edges, fewer than d={d}")
    direction, rounds = _orient_components(g, lambda comp: cycle_length_bound(comp.n, d), config, seed)
    if metrics is not None:
        metrics.charge("deterministic", rounds)
    return _verified(g, direction, "deterministic_sinkless")


def _orient_components(
    g: Graph, limit_for: Callable[[Graph], int], config: SinklessConfig, seed: int
) -> tuple[dict[int, Direction], int]:
    """Solve each connected component independently; rounds are the maximum."""
    direction: dict[int, Direction] = {}
    rounds = 0
    for index, comp in enumerate(components(g)):
        sub = induced(g, comp, boundary="drop")
        local, comp_rounds = _orient_component(sub.graph, limit_for(sub.graph), config,
                                               derive_seed(seed, "component", index))
        rounds = max(rounds, comp_rounds)
        for eid, (tail, head) in local.items():
            direction[sub.edge_map[eid]] = (sub.node_map[tail], None if head is None else sub.node_map[head])
    return direction, rounds


def _lift(source: Graph, sub: Subgraph, local: dict[int, Direction]) -> dict[int, Direction]:
    """Map directions on a subgraph back to `source`; boundary half-edges regain their far endpoint."""
    lifted = {}
    for eid, (tail, _) in local.items():
        original = sub.edge_map[eid]
        tail = sub.node_map[tail]
        lifted[original] = (tail, source.edge(original).other(tail))
    return lifted


def shatter_and_finish(
    g: Graph, seed: int, config: Optional[SinklessConfig] = None, metrics: Optional[RunMetrics] = None
) -> Orientation:
    """Regular graphs: the marking phase, then the deterministic algorithm on
    every bad component. Components of min degree 2 treat all cycles as short."""
    config = config or load_algorithms_config().sinkless
    metrics = metrics if metrics is not None else RunMetrics()
    shatter = pre_shatter(g, seed, config)
    metrics.absorb(shatter.metrics, "shatter")
    residual = shatter.residual
    local, rounds = _orient_components(
        residual.graph, lambda comp: cycle_length_bound(comp.n, comp.min_degree), config,
        derive_seed(seed, "residual"))
    metrics.charge("residual", rounds)
    direction = dict(shatter.partial.direction)
    direction.update(_lift(g, residual, local))
    return _verified(g, direction, "shatter_and_finish")


# --- irregular inputs ------------------------------------------------------------------------

def cluster_radius(d: int, threshold: int) -> int:
    """Smallest c with (d-1)^(c/2) > threshold."""
    return math.floor(2 * math.log(threshold) / math.log(d - 1)) + 1


def sinkless_low_degree(
    g: Graph,
    d: int,
    config: Optional[SinklessConfig] = None,
    metrics: Optional[RunMetrics] = None,
    seed: int = 0,
) -> Orientation:
    config = config or load_algorithms_config().sinkless
    if not 3 <= d <= config.high_degree_threshold:
        raise PreconditionError(f"low-degree path needs 3 <= d <= {config.high_degree_threshold}, got {d}")
    if g.n and g.min_degree < d:
        raise PreconditionError(f"min degree {g.min_degree} is below d={d}")
    metrics = metrics if metrics is not None else RunMetrics()
    c = cluster_radius(d, config.high_degree_threshold)

    direction: dict[int, Direction] = {e.eid: (e.u, None) for e in g.half_edges()}
    for eid, cycle in short_cycle_choices(g, 3 * c, config.cycle_enumeration_cap).items():
        direction[eid] = cycle.direction_of(eid)
    metrics.charge("short_cycles", 3 * c)

    satisfied = {x for eid in direction for x in g.edge(eid).endpoints()}
    rest = [u for u in g.nodes() if u not in satisfied]
    logger.debug("low-degree path: c=%d, %d nodes left after short cycles", c, len(rest))
    if rest:
        sub = induced(g, rest, boundary="half")
        direction.update(_lift(g, sub, _orient_clusters(sub.graph, c, config, metrics, seed)))
    for edge in g.edges:
        if edge.eid not in direction:
            direction[edge.eid] = (min(edge.u, edge.v), max(edge.u, edge.v))
    return _verified(g, direction, "sinkless_low_degree")


def _orient_clusters(
    h: Graph, c: int, config: SinklessConfig, metrics: RunMetrics, seed: int
) -> dict[int, Direction]:
    """Cluster around a c-hop independent set, orient the contracted graph and
    point every cluster tree at its cluster's outgoing edge."""
    members, mis_metrics = maximal_independent_set(h, k=c, seed=derive_seed(seed, "mis"))
    metrics.absorb(mis_metrics, "clusters")

    owner = {m: m for m in members}
    parent: dict[int, int] = {}
    frontier = sorted(members)
    while frontier:
        candidates: dict[int, tuple[int, int]] = {}
        for x in frontier:
            for eid, y in h.adjacency(x):
                if y is None or y in owner:
                    continue
                offer = (owner[x], eid)
                if y not in candidates or offer < candidates[y]:
                    candidates[y] = offer
        for y, (member, eid) in candidates.items():
            owner[y] = member
            parent[y] = eid
        frontier = sorted(candidates)
    metrics.charge("cluster_bfs", c)
    if len(owner) != h.n:
        orphan = next(u for u in h.nodes() if u not in owner)
        raise InvariantViolation(f"node {orphan} is farther than {c} hops from every cluster center", witness=orphan)

    index = {m: i for i, m in enumerate(sorted(members))}
    tree_edges = set(parent.values())
    contracted_edges = []
    back: list[int] = []
    for edge in h.edges:
        if edge.v is None:
            contracted_edges.append((len(back), index[owner[edge.u]], None))
        elif owner[edge.u] != owner[edge.v]:
            contracted_edges.append((len(back), index[owner[edge.u]], index[owner[edge.v]]))
        elif edge.eid in tree_edges:
            continue
        else:
            raise InvariantViolation(f"edge {edge.eid} closes a short cycle inside a cluster", witness=edge.eid)
        back.append(edge.eid)
    contracted = Graph(len(members), contracted_edges)

    sub_seed = derive_seed(seed, "contracted")
    if contracted.min_degree > config.high_degree_threshold:
        outer = _orient_via_copies(contracted, sub_seed, config, metrics)
    else:
        outer = deterministic_sinkless(contracted, 3, config, metrics, sub_seed)

    direction: dict[int, Direction] = {}
    exit_node: dict[int, int] = {}
    for k, (tail_cluster, _) in sorted(outer.direction.items()):
        edge = h.edge(back[k])
        tail = edge.u if edge.v is None or index[owner[edge.u]] == tail_cluster else edge.v
        direction[edge.eid] = (tail, edge.other(tail))
        exit_node.setdefault(tail_cluster, tail)

    tree: dict[int, list[tuple[int, int]]] = {}
    for y, eid in parent.items():
        x = h.edge(eid).other(y)
        tree.setdefault(x, []).append((eid, y))
        tree.setdefault(y, []).append((eid, x))
    for root in exit_node.values():
        seen = {root}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for eid, y in tree.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    direction[eid] = (y, x)
                    queue.append(y)
    metrics.charge("cluster_trees", 2 * c)
    return direction


def _orient_via_copies(
    g: Graph, seed: int, config: SinklessConfig, metrics: RunMetrics
) -> Orientation:
    """High min degree d: every node splits into floor(deg/d) copies of exactly d
    edges. Leftover edges are marked by their node and become half-edges at the
    other end, so the copy graph is d-regular and goes through shattering."""
    d = g.min_degree
    copy_of: dict[tuple[int, int], int] = {}
    copy_owner: list[int] = []
    for u in g.nodes():
        incident = g.adjacency(u)
        usable = len(incident) // d * d
        base = len(copy_owner)
        copy_owner.extend([u] * (usable // d))
        for i, (eid, _) in enumerate(incident[:usable]):
            copy_of[(u, eid)] = base + i // d

    direction: dict[int, Direction] = {}
    h_edges = []
    back: list[int] = []
    for edge in g.edges:
        ends = [copy_of.get((x, edge.eid)) for x in edge.endpoints()]
        if edge.v is None:
            if ends[0] is None:
                direction[edge.eid] = (edge.u, None)
                continue
            h_edges.append((len(back), ends[0], None))
        elif ends[0] is None and ends[1] is None:
            direction[edge.eid] = (min(edge.u, edge.v), max(edge.u, edge.v))
            continue
        elif ends[0] is None:
            h_edges.append((len(back), ends[1], None))
        elif ends[1] is None:
            h_edges.append((len(back), ends[0], None))
        else:
            h_edges.append((len(back), ends[0], ends[1]))
        back.append(edge.eid)
    h = Graph(len(copy_owner), h_edges)
    logger.debug("copy graph: %d copies of degree %d for %d nodes", h.n, d, g.n)

    inner = shatter_and_finish(h, seed, config, metrics)
    for k, (tail_copy, _) in inner.direction.items():
        edge = g.edge(back[k])
        tail = copy_owner[tail_copy]
        direction[edge.eid] = (tail, edge.other(tail))
    return _verified(g, direction, "high_degree")


def sinkless_dispatch(
    g: Graph, seed: int, config: Optional[SinklessConfig] = None
) -> tuple[Orientation, RunMetrics]:
    """Pick a strategy from the degree profile, run it and verify the result."""
    config = config or load_algorithms_config().sinkless
    metrics = RunMetrics()
    if g.n == 0:
        return Orientation({}), metrics
    if g.min_degree < 3:
        raise PreconditionError(f"sinkless orientation needs min degree >= 3, got {g.min_degree}")

    if g.min_degree >= config.fast_path_c1 * math.log(max(g.n, 2)):
        states, fast = run(g, _RandomOrientProgram(), max_rounds=1, seed=derive_seed(seed, "fast"))
        metrics.absorb(fast)
        direction: dict[int, Direction] = {}
        for chosen in states:
            direction.update(chosen)
        if _is_sinkless(g, direction):
            logger.debug("random orientation is already sinkless")
            return _verified(g, direction, "fast_path"), metrics
        logger.info("random orientation left a sink, falling back")

    if g.min_degree > config.high_degree_threshold:
        orientation = _orient_via_copies(g, seed, config, metrics)
    else:
        orientation = sinkless_low_degree(g, g.min_degree, config, metrics, seed)

    report = check(g, orientation, Contract(kind="sinkless"))
    if not report.passed:
        failure = report.failures()[0]
        raise InvariantViolation(f"sinkless dispatch failed check {failure.name}", witness=failure.witness)
    return orientation, metrics
