"""
Undirected degree splitting by augmenting paths.

A node is labeled with every color it has t or t-1 edges of; sources hold exactly t
edges of one color. An augmenting path starts at a source, follows edges of the
current node's label with alternating labels, and stops at a node that does not
carry the label its final edge is recolored to (half-edges count as unlabeled).
Flipping such a path lowers the source's full color by one and keeps every other
node within t-1.

The deterministic path finder grows token pseudo-trees level by level; the
randomized one returns a maximal set of short paths, greedily or through an MIS
on the conflict graph of enumerated candidates.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Literal, Optional

from .artifacts import Color, TwoColoring, require_complete
from .config import SplitConfig, load_algorithms_config
from .errors import (
    BudgetExceeded,
    IterationCapExceeded,
    InvariantViolation,
    ParameterError,
    PreconditionError,
    StalePathError,
)
from .graph import Graph, devirtualize, virtualize
from .luby import conflict_graph, maximal_independent_set
from .oracles import Contract, check
from .simulator import RunMetrics, derive_seed

logger = logging.getLogger(__name__)

SearchMode = Literal["greedy-sequential", "luby-supergraph"]

Pair = tuple[int, int]


@dataclass(frozen=True)
class AugmentingPath:
    """Nodes v1..vk and the edge ids between them; vk is None for a half-edge."""

    nodes: tuple[Optional[int], ...]
    edges: tuple[int, ...]

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def terminal(self) -> Optional[int]:
        return self.nodes[-1]

    @property
    def terminal_key(self) -> tuple:
        return ("half", self.edges[-1]) if self.terminal is None else ("node", self.terminal)

    def ordered_pairs(self) -> list[Pair]:
        return [(self.nodes[i], eid) for i, eid in enumerate(self.edges)]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass
class LevelRecord:
    level: int
    active: int
    succeeded: int
    failed: int
    tokens: int


@dataclass
class SplitStatistics:
    invocations: int = 0
    returned: int = 0
    accepted: int = 0
    levels: list[LevelRecord] = field(default_factory=list)

    def failures_per_level(self) -> list[int]:
        return [record.failed for record in self.levels]

    def to_dict(self) -> dict:
        return {
            "invocations": self.invocations,
            "returned": self.returned,
            "accepted": self.accepted,
            "levels": [asdict(record) for record in self.levels],
        }


# --- labels and sources -------------------------------------------------------------------

def log_levels(m: int, config: SplitConfig) -> float:
    """log_{1.5} m, never below 1."""
    return max(math.log(max(m, 1)) / math.log(config.log_base), 1.0)


def node_labels(red: list[int], blue: list[int], node: Optional[int], t: int) -> set[Color]:
    if node is None:
        return set()
    labels = set()
    if red[node] >= t - 1:
        labels.add(Color.RED)
    if blue[node] >= t - 1:
        labels.add(Color.BLUE)
    return labels


Degrees = tuple[list[int], list[int]]


def sources(g: Graph, coloring: TwoColoring, t: int) -> list[int]:
    return _sources_of(coloring.degrees(g), t)


def _sources_of(degrees: Degrees, t: int) -> list[int]:
    red, blue = degrees
    return [u for u in range(len(red)) if red[u] == t or blue[u] == t]


def _source_label(red: list[int], blue: list[int], s: int, t: int) -> Color:
    return Color.RED if red[s] == t else Color.BLUE


def _require_balanced(g: Graph, coloring: TwoColoring, t: int) -> None:
    require_complete(g, coloring)
    worst = coloring.max_color_degree(g)
    if worst > t:
        raise PreconditionError(f"coloring is not {t}-balanced (a node has {worst} edges of one color)")


def _check_regime(g: Graph, t: int, eps: float, config: SplitConfig) -> None:
    d = g.max_degree
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    floor_bound = config.regime_constant * log_levels(g.m, config) / max(d, 1)
    if eps <= floor_bound:
        raise ParameterError(
            f"eps={eps} is not above {floor_bound:.3f} = 4 log1.5(m)/d for d={d}; "
            "use balanced_split_randomized for small eps*d")
    target = math.floor((1 + eps) * d / 2)
    if t <= target:
        raise PreconditionError(f"t={t} must exceed floor((1+eps)d/2)={target}")


# --- augmentation ---------------------------------------------------------------------------

def validate_path(
    g: Graph, coloring: TwoColoring, path: AugmentingPath, t: int, degrees: Optional[Degrees] = None,
) -> None:
    """Raise StalePathError unless `path` is augmenting for `coloring` at threshold t.

    `degrees` are the red and blue degrees of `coloring`, computed when omitted.
    """
    red, blue = degrees if degrees is not None else coloring.degrees(g)
    if not path.edges or len(path.nodes) != len(path.edges) + 1:
        raise StalePathError("an augmenting path needs one more node than edges and at least one edge")
    if len(set(path.edges)) != len(path.edges):
        raise StalePathError("augmenting path repeats an edge")
    s = path.source
    if s is None or (red[s] != t and blue[s] != t):
        raise StalePathError(f"path start {s} is not a source at t={t}")
    label = _source_label(red, blue, s, t)
    for i, eid in enumerate(path.edges):
        u, w = path.nodes[i], path.nodes[i + 1]
        edge = g.edge(eid)
        if u is None or u not in edge.endpoints() or edge.other(u) != w:
            raise StalePathError(f"edge {eid} does not join {u} and {w}")
        if coloring.color[eid] is not label:
            raise StalePathError(f"edge {eid} is not colored like the label {label.value} of node {u}")
        following = label.flipped
        if i == len(path.edges) - 1:
            if following in node_labels(red, blue, w, t):
                raise StalePathError(f"terminal {w} is labeled {following.value}")
        else:
            if following not in node_labels(red, blue, w, t):
                raise StalePathError(f"interior node {w} is not labeled {following.value}")
            label = following


def augment(g: Graph, coloring: TwoColoring, path: AugmentingPath, t: int) -> TwoColoring:
    return _augment_all(g, coloring, [path], t)[0]


def accept_paths(paths: list[AugmentingPath]) -> list[AugmentingPath]:
    """One path per terminal, smallest source id first. A path sharing an edge
    with an accepted one (only possible on last edges) is rejected as well."""
    taken_terminals: set[tuple] = set()
    taken_edges: set[int] = set()
    accepted = []
    for path in sorted(paths, key=lambda p: (p.source, p.edges)):
        if path.terminal_key in taken_terminals or taken_edges.intersection(path.edges):
            continue
        accepted.append(path)
        taken_terminals.add(path.terminal_key)
        taken_edges.update(path.edges)
    return accepted


def _augment_all(
    g: Graph, coloring: TwoColoring, paths: list[AugmentingPath], t: int, degrees: Optional[Degrees] = None,
) -> tuple[TwoColoring, Degrees]:
    """Validate every path against `coloring`, then flip them all. Returns the new
    coloring with its red and blue degrees, updated edge by edge."""
    red, blue = degrees if degrees is not None else coloring.degrees(g)
    for path in paths:
        validate_path(g, coloring, path, t, (red, blue))
    red, blue = list(red), list(blue)
    colors = dict(coloring.color)
    for path in paths:
        for eid in path.edges:
            was = colors[eid]
            colors[eid] = was.flipped
            gain, loss = (blue, red) if was is Color.RED else (red, blue)
            for node in g.edge(eid).endpoints():
                loss[node] -= 1
                gain[node] += 1
    return TwoColoring(colors), (red, blue)


# --- deterministic pseudo-tree search -------------------------------------------------------------

@dataclass
class _Token:
    source: int
    position: int
    label: Color
    trace: tuple[tuple[int, int, Optional[int]], ...] = ()
    paused: bool = False

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(eid for _, eid, _ in self.trace)

    def moved(self, eid: int, to: Optional[int], paused: bool) -> "_Token":
        return _Token(self.source, self.position, self.label, self.trace + ((self.position, eid, to),), paused)


def _path_of(token: _Token) -> AugmentingPath:
    nodes = (token.source,) + tuple(to for _, _, to in token.trace)
    return AugmentingPath(nodes, token.key)


def find_augmenting_paths(
    g: Graph,
    coloring: TwoColoring,
    t: int,
    eps: float,
    config: Optional[SplitConfig] = None,
    strict: bool = True,
    metrics: Optional[RunMetrics] = None,
    stats: Optional[SplitStatistics] = None,
) -> list[AugmentingPath]:
    """Almost edge-disjoint augmenting paths from distinct sources.

    Every source starts with one token. A level runs h steps; in a step the
    active tokens at a node each take one unused edge of their label, and up to
    budget(u) of them (smallest source, then trace, first) take a second edge and
    split. Split tokens pause until the next level. At the end of level i a
    source with an augmenting path is done, a source with fewer than L_{i+1}
    tokens fails, and the rest keep their L_{i+1} smallest traces.
    """
    config = config or load_algorithms_config().split
    _require_balanced(g, coloring, t)
    if strict:
        _check_regime(g, t, eps, config)
    elif eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    red, blue = coloring.degrees(g)
    active = sources(g, coloring, t)
    if not active:
        return []

    log_m = log_levels(g.m, config)
    level_count = max(1, math.ceil(log_m))
    level_budget = max(0, math.floor((2 * t - g.max_degree - 2) / log_m))
    h = math.ceil(config.step_multiplier * log_m ** 2 / eps)
    logger.debug("token search: %d sources, %d levels of %d steps, budget %d",
                 len(active), level_count, h, level_budget)

    used: set[Pair] = set()
    tokens = {s: [_Token(s, s, _source_label(red, blue, s, t))] for s in active}
    found: dict[int, AugmentingPath] = {}
    quota = 1
    for level in range(1, level_count + 1):
        live_sources = sorted(tokens)
        if not live_sources:
            break
        budget: dict[int, int] = {}
        for _ in range(h):
            if not _token_step(g, coloring, red, blue, t, tokens, found, used, budget, level_budget):
                break
        if metrics is not None:
            metrics.charge("tokens", h)
            metrics.charge("backtrack", level * h)

        quota_next = 2 * math.ceil(3 * quota / 4)
        succeeded = failed = carried = 0
        for s in live_sources:
            if s in found:
                succeeded += 1
                del tokens[s]
            elif len(tokens[s]) < quota_next:
                failed += 1
                del tokens[s]
            else:
                kept = sorted(tokens[s], key=lambda tk: tk.key)[:quota_next]
                for token in kept:
                    token.paused = False
                tokens[s] = kept
                carried += len(kept)
        if stats is not None:
            stats.levels.append(LevelRecord(level, len(live_sources), succeeded, failed, carried))
        quota = quota_next

    paths = [found[s] for s in sorted(found)]
    if stats is not None:
        stats.returned += len(paths)
    if len(paths) * 2 < len(active):
        logger.debug("token search returned %d paths for %d sources", len(paths), len(active))
    return paths


def _token_step(
    g: Graph,
    coloring: TwoColoring,
    red: list[int],
    blue: list[int],
    t: int,
    tokens: dict[int, list[_Token]],
    found: dict[int, AugmentingPath],
    used: set[Pair],
    budget: dict[int, int],
    level_budget: int,
) -> bool:
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
        free = {c: [eid for eid, _ in g.adjacency(u) if coloring.color[eid] is c and (u, eid) not in used]
                for c in (Color.RED, Color.BLUE)}
        grants: list[list[int]] = []
        for token in queue:
            grants.append([free[token.label].pop(0)] if free[token.label] else [])
        doubles = min(len(queue), budget.get(u, level_budget))
        for token, granted in zip(queue, grants):
            if doubles == 0:
                break
            if granted and free[token.label]:
                granted.append(free[token.label].pop(0))
                doubles -= 1
                budget[u] = budget.get(u, level_budget) - 1
        for token, granted in zip(queue, grants):
            if not granted:
                continue
            moved = True
            tokens[token.source].remove(token)
            for eid in granted:
                used.add((u, eid))
                child = token.moved(eid, g.edge(eid).other(u), paused=len(granted) == 2)
                arrivals.setdefault(token.source, []).append(child)

    for s, arrived in arrivals.items():
        for child in sorted(arrived, key=lambda tk: tk.key):
            _, eid, w = child.trace[-1]
            if eid in child.key[:-1]:
                continue
            following = child.label.flipped
            if following not in node_labels(red, blue, w, t):
                if s not in found:
                    found[s] = _path_of(child)
                continue
            child.position = w
            child.label = following
            tokens[s].append(child)
    return moved


# --- balance improvement --------------------------------------------------------------------

PathFinder = Callable[[TwoColoring, int], list[AugmentingPath]]


def _improve(
    g: Graph,
    coloring: TwoColoring,
    t: int,
    finder: PathFinder,
    config: SplitConfig,
    stats: Optional[SplitStatistics],
) -> TwoColoring:
    cap = max(1, math.ceil(config.iteration_cap_factor * max(g.max_degree, 1) * math.log(max(g.n, 2))))
    degrees = coloring.degrees(g)
    current = _sources_of(degrees, t)
    invocations = 0
    while current:
        if invocations >= cap:
            raise IterationCapExceeded(
                f"{len(current)} source(s) left at t={t} after {cap} path searches", residual_sources=len(current))
        paths = finder(coloring, t)
        accepted = accept_paths(paths)
        if not accepted:
            raise IterationCapExceeded(
                f"no augmenting path found for {len(current)} source(s) at t={t}", residual_sources=len(current))
        coloring, degrees = _augment_all(g, coloring, accepted, t, degrees)
        invocations += 1
        if stats is not None:
            stats.invocations += 1
            stats.accepted += len(accepted)
        remaining = _sources_of(degrees, t)
        if len(remaining) >= len(current) or max(degrees[0] + degrees[1], default=0) > t:
            raise InvariantViolation(f"augmentation at t={t} did not reduce the sources", witness=remaining[:1])
        current = remaining
    logger.debug("t=%d: %d-balanced after %d path searches", t, t - 1, invocations)
    return coloring


def improve_balance(
    g: Graph,
    coloring: TwoColoring,
    t: int,
    eps: float,
    config: Optional[SplitConfig] = None,
    strict: bool = True,
    metrics: Optional[RunMetrics] = None,
    stats: Optional[SplitStatistics] = None,
) -> TwoColoring:
    """Turn a t-balanced coloring into a (t-1)-balanced one."""
    config = config or load_algorithms_config().split

    def finder(current: TwoColoring, threshold: int) -> list[AugmentingPath]:
        return find_augmenting_paths(g, current, threshold, eps, config, strict, metrics, stats)

    _require_balanced(g, coloring, t)
    return _improve(g, coloring, t, finder, config, stats)


def _all_red(g: Graph) -> TwoColoring:
    return TwoColoring({e.eid: Color.RED for e in g.edges})


def _audit_balance(g: Graph, coloring: TwoColoring, bound: int, stage: str) -> TwoColoring:
    report = check(g, coloring, Contract(kind="balance", t=bound))
    if not report.passed:
        raise InvariantViolation(f"{stage} is not {bound}-balanced", witness=report.failures()[0].witness)
    return coloring


def balanced_split_low(
    g: Graph,
    eps: float,
    config: Optional[SplitConfig] = None,
    strict: bool = True,
    metrics: Optional[RunMetrics] = None,
    stats: Optional[SplitStatistics] = None,
) -> TwoColoring:
    config = config or load_algorithms_config().split
    if g.m == 0:
        return TwoColoring({})
    d = g.max_degree
    target = math.floor((1 + eps) * d / 2)
    if strict:
        _check_regime(g, target + 1, eps, config)
    coloring = _all_red(g)
    for t in range(d, target, -1):
        coloring = improve_balance(g, coloring, t, eps, config, strict, metrics, stats)
    return _audit_balance(g, coloring, target, "balanced_split_low")


def balanced_split_high(
    g: Graph,
    eps: float,
    config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
    stats: Optional[SplitStatistics] = None,
    low_splitter: Optional[Callable[[Graph, float], TwoColoring]] = None,
) -> TwoColoring:
    """Split copies of degree d = ceil(4 log1.5(m)/eps') with eps' = eps/2 and merge."""
    config = config or load_algorithms_config().split
    if g.m == 0:
        return TwoColoring({})
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    delta = g.max_degree
    log_m = log_levels(g.m, config)
    needed = math.ceil(config.high_degree_constant * log_m / eps ** 2)
    if delta < needed:
        raise PreconditionError(f"high-degree splitting needs max degree >= {needed}, got {delta}")
    eps_copy = eps / 2
    copy_degree = math.ceil(config.copy_degree_constant * log_m / eps_copy)
    copies, vmap = virtualize(g, copy_degree)
    logger.debug("virtualized %d nodes into %d copies of degree <= %d", g.n, copies.n, copy_degree)
    if low_splitter is None:
        split = balanced_split_low(copies, eps_copy, config, strict=False, metrics=metrics, stats=stats)
    else:
        split = low_splitter(copies, eps_copy)
    return _audit_balance(g, devirtualize(split, vmap), math.floor((1 + eps) * delta / 2), "balanced_split_high")


# --- randomized path sets ---------------------------------------------------------------------

def path_length_limit(n: int, eps: float, config: SplitConfig) -> int:
    return max(1, math.ceil(config.path_length_constant * math.log(max(n, 2)) / eps))


def _alternating_tree_path(
    g: Graph, coloring: TwoColoring, red: list[int], blue: list[int], t: int, s: int, limit: int, used: set[Pair]
) -> Optional[AugmentingPath]:
    """Grow the alternating BFS tree from s over unused ordered pairs; the first
    augmenting path found, or None within `limit` levels."""
    start = _Token(s, s, _source_label(red, blue, s, t))
    visited = {s}
    frontier = [start]
    for _ in range(limit):
        grown = []
        for leaf in frontier:
            u = leaf.position
            for eid, w in g.adjacency(u):
                if coloring.color[eid] is not leaf.label or (u, eid) in used:
                    continue
                step = leaf.moved(eid, w, paused=False)
                following = leaf.label.flipped
                if following not in node_labels(red, blue, w, t):
                    return _path_of(step)
                if w in visited:
                    continue
                visited.add(w)
                step.position, step.label = w, following
                grown.append(step)
        if not grown:
            return None
        frontier = grown
    return None


def _enumerate_candidates(
    g: Graph, coloring: TwoColoring, red: list[int], blue: list[int], t: int, s: int, limit: int, budget: int
) -> list[AugmentingPath]:
    found: list[AugmentingPath] = []
    stack = [(_Token(s, s, _source_label(red, blue, s, t)), frozenset({s}))]
    while stack:
        token, visited = stack.pop()
        u = token.position
        for eid, w in g.adjacency(u):
            if coloring.color[eid] is not token.label or w in visited:
                continue
            step = token.moved(eid, w, paused=False)
            following = token.label.flipped
            if following not in node_labels(red, blue, w, t):
                found.append(_path_of(step))
                if len(found) > budget:
                    raise BudgetExceeded(
                        f"more than {budget} candidate paths; use the greedy-sequential mode")
            elif len(step.trace) < limit:
                step.position, step.label = w, following
                stack.append((step, visited | {w}))
    return found


def find_paths_randomized(
    g: Graph,
    coloring: TwoColoring,
    t: int,
    eps: float,
    mode: SearchMode = "greedy-sequential",
    seed: int = 0,
    config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
) -> list[AugmentingPath]:
    """A maximal set of almost edge-disjoint augmenting paths of length <= l."""
    config = config or load_algorithms_config().split
    _require_balanced(g, coloring, t)
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    target = math.ceil((1 + eps) * g.max_degree / 2)
    if t <= target:
        raise PreconditionError(f"t={t} must exceed ceil((1+eps)delta/2)={target}")
    red, blue = coloring.degrees(g)
    pending = sources(g, coloring, t)
    if not pending:
        return []
    limit = path_length_limit(g.n, eps, config)

    if mode == "greedy-sequential":
        used: set[Pair] = set()
        paths = []
        for s in pending:
            path = _alternating_tree_path(g, coloring, red, blue, t, s, limit, used)
            if path is not None:
                paths.append(path)
                used.update(path.ordered_pairs())
        if metrics is not None:
            metrics.charge("greedy_paths", limit * len(pending))
        return paths

    if mode != "luby-supergraph":
        raise ParameterError(f"unknown search mode {mode!r}")
    if g.n > config.luby_max_nodes:
        raise BudgetExceeded(f"luby-supergraph mode is limited to {config.luby_max_nodes} nodes; "
                             "use the greedy-sequential mode")
    limit = min(limit, config.luby_max_length)
    candidates: list[AugmentingPath] = []
    for s in pending:
        candidates.extend(_enumerate_candidates(g, coloring, red, blue, t, s, limit,
                                                config.luby_max_candidates - len(candidates)))
    holders: dict[tuple, list[int]] = {}
    for index, path in enumerate(candidates):
        holders.setdefault(("source", path.source), []).append(index)
        for pair in path.ordered_pairs():
            holders.setdefault(("pair",) + pair, []).append(index)
    conflicts = [(a, b) for group in holders.values() for i, a in enumerate(group) for b in group[i + 1:]]
    chosen, mis_metrics = maximal_independent_set(conflict_graph(len(candidates), conflicts),
                                                  seed=derive_seed(seed, "supergraph"))
    if metrics is not None:
        metrics.charge("supergraph_mis", mis_metrics.rounds * limit, mis_metrics.messages)
    return sorted((candidates[i] for i in chosen), key=lambda p: p.source)


def balanced_split_randomized(
    g: Graph,
    eps: float,
    seed: int,
    mode: SearchMode = "greedy-sequential",
    config: Optional[SplitConfig] = None,
    metrics: Optional[RunMetrics] = None,
    stats: Optional[SplitStatistics] = None,
) -> TwoColoring:
    config = config or load_algorithms_config().split
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if g.m == 0:
        return TwoColoring({})
    delta = g.max_degree
    target = math.ceil((1 + eps) * delta / 2)
    coloring = _all_red(g)
    for t in range(delta, target, -1):
        calls = iter(range(1 << 62))

        def finder(current: TwoColoring, threshold: int) -> list[AugmentingPath]:
            paths = find_paths_randomized(g, current, threshold, eps, mode,
                                          derive_seed(seed, threshold, next(calls)), config, metrics)
            if stats is not None:
                stats.returned += len(paths)
            return paths

        coloring = _improve(g, coloring, t, finder, config, stats)
    return _audit_balance(g, coloring, target, "balanced_split_randomized")
