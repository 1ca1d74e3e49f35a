"""
Synchronous LOCAL-model engine.

Round 0 runs every node's `init`. Each later round delivers the messages written
in the previous round (messages on half-edges are dropped) and steps every node
that has not halted. Rounds and delivered messages are metered in RunMetrics.
"""

import json
import logging
import zlib
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .errors import InvariantViolation, RoundLimitExceeded
from .graph import Edge, Graph

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 63) - 1


def derive_seed(seed: int, *labels) -> int:
    """Independent sub-seed for a named sub-phase of a seeded run."""
    words = [seed & SEED_MASK]
    for label in labels:
        words.append(zlib.crc32(label.encode()) if isinstance(label, str) else int(label) & SEED_MASK)
    state = np.random.SeedSequence(words).generate_state(2, np.uint32)
    return (int(state[0]) << 31 | int(state[1]) >> 1) & SEED_MASK


@dataclass(frozen=True)
class NodeView:
    node: int
    incident: tuple[tuple[int, Optional[int]], ...]
    n: int
    input: Any = None

    @property
    def degree(self) -> int:
        return len(self.incident)

    def full_edges(self) -> list[tuple[int, int]]:
        return [(eid, other) for eid, other in self.incident if other is not None]


@dataclass
class StepContext:
    view: NodeView
    round: int
    seed: int

    @cached_property
    def rng(self) -> np.random.Generator:
        entropy = [self.seed & SEED_MASK, self.view.node, self.round]
        return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass
class Step:
    state: Any
    outbox: dict[int, Any] = field(default_factory=dict)
    halted: bool = False


class NodeProgram(ABC):
    """A per-node program; it sees only its own view, state and inbox."""

    name = "program"

    @abstractmethod
    def init(self, ctx: StepContext) -> Step:
        ...

    @abstractmethod
    def step(self, state: Any, inbox: dict[int, Any], ctx: StepContext) -> Step:
        ...


@dataclass
class PhaseRecord:
    phase: str
    rounds: int
    messages: int


@dataclass
class RunMetrics:
    rounds: int = 0
    messages: int = 0
    phases: list[PhaseRecord] = field(default_factory=list)
    max_bad_component: Optional[int] = None

    def charge(self, phase: str, rounds: int, messages: int = 0) -> None:
        self.rounds += rounds
        self.messages += messages
        self.phases.append(PhaseRecord(phase, rounds, messages))

    def absorb(self, other: "RunMetrics", prefix: Optional[str] = None) -> None:
        for record in other.phases:
            label = f"{prefix}.{record.phase}" if prefix else record.phase
            self.charge(label, record.rounds, record.messages)
        if other.max_bad_component is not None:
            self.max_bad_component = max(self.max_bad_component or 0, other.max_bad_component)

    @property
    def per_phase_rounds(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for record in self.phases:
            totals[record.phase] = totals.get(record.phase, 0) + record.rounds
        return totals

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "messages": self.messages,
            "per_phase_rounds": self.per_phase_rounds,
            "max_bad_component": self.max_bad_component,
        }


def write_phase_log(path: Path, metrics: RunMetrics) -> None:
    with open(path, "w") as f:
        for record in metrics.phases:
            f.write(json.dumps(asdict(record)) + "\n")


def run(
    g: Graph,
    program: NodeProgram,
    max_rounds: int,
    seed: int,
    inputs: Optional[Sequence[Any]] = None,
) -> tuple[list[Any], RunMetrics]:
    if max_rounds < 0:
        raise ValueError(f"max_rounds must be >= 0, got {max_rounds}")
    views = [NodeView(u, g.adjacency(u), g.n, None if inputs is None else inputs[u]) for u in g.nodes()]
    incident = [{eid for eid, _ in view.incident} for view in views]

    steps = [program.init(StepContext(view, 0, seed)) for view in views]
    states = [s.state for s in steps]
    halted = [s.halted for s in steps]
    outboxes = [_checked_outbox(s.outbox, incident[u], u) for u, s in enumerate(steps)]

    rounds = 0
    messages = 0
    while not all(halted):
        if rounds >= max_rounds:
            metrics = RunMetrics()
            metrics.charge(program.name, rounds, messages)
            raise RoundLimitExceeded(
                f"{program.name} did not halt within {max_rounds} rounds "
                f"({halted.count(False)} node(s) still active)",
                partial_states=list(states),
                metrics=metrics,
            )
        rounds += 1
        inboxes: list[dict[int, Any]] = [{} for _ in views]
        for u, outbox in enumerate(outboxes):
            for eid, message in outbox.items():
                other = g.edge(eid).other(u)
                if other is None:
                    continue
                inboxes[other][eid] = message
                messages += 1
        outboxes = [{} for _ in views]
        for u, view in enumerate(views):
            if halted[u]:
                continue
            result = program.step(states[u], inboxes[u], StepContext(view, rounds, seed))
            states[u] = result.state
            halted[u] = result.halted
            outboxes[u] = _checked_outbox(result.outbox, incident[u], u)

    metrics = RunMetrics()
    metrics.charge(program.name, rounds, messages)
    logger.debug("%s halted after %d rounds, %d messages", program.name, rounds, messages)
    return states, metrics


def _checked_outbox(outbox: dict[int, Any], incident: set[int], node: int) -> dict[int, Any]:
    for eid in outbox:
        if eid not in incident:
            raise InvariantViolation(f"node {node} wrote to non-incident edge {eid}", witness=node)
    return outbox


# --- full-information gathering -------------------------------------------------

@dataclass(frozen=True)
class BallView:
    """What a node knows after gathering: nodes within distance r, edges with an
    endpoint within distance r-1, and its own incident edges."""

    center: int
    radius: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    distance: dict[int, int]

    def edge_ids(self) -> set[int]:
        return {e.eid for e in self.edges}


class _GatherProgram(NodeProgram):
    name = "gather"

    def __init__(self, radius: int):
        self.radius = radius

    def init(self, ctx: StepContext) -> Step:
        u = ctx.view.node
        known = {eid: (u, other) for eid, other in ctx.view.incident}
        if self.radius == 0:
            return Step(known, halted=True)
        return Step(known, self._broadcast(ctx.view, dict(known)))

    def step(self, state, inbox, ctx: StepContext) -> Step:
        fresh = {}
        for delta in inbox.values():
            for eid, ends in delta.items():
                if eid not in state:
                    state[eid] = ends
                    fresh[eid] = ends
        if ctx.round >= self.radius:
            return Step(state, halted=True)
        return Step(state, self._broadcast(ctx.view, fresh))

    @staticmethod
    def _broadcast(view: NodeView, payload: dict) -> dict:
        if not payload:
            return {}
        return {eid: payload for eid, _ in view.full_edges()}


def gather_ball(g: Graph, radius: int, seed: int = 0) -> tuple[list[BallView], RunMetrics]:
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    states, metrics = run(g, _GatherProgram(radius), max_rounds=radius, seed=seed)
    return [_trim(u, radius, known) for u, known in enumerate(states)], metrics


def _trim(center: int, radius: int, known: dict[int, tuple[int, Optional[int]]]) -> BallView:
    adjacency: dict[int, list[int]] = {}
    for ends in known.values():
        a, b = ends
        if b is None:
            continue
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    distance = {center: 0}
    frontier = [center]
    while frontier:
        nxt = []
        for u in frontier:
            if distance[u] >= radius:
                continue
            for w in adjacency.get(u, ()):
                if w not in distance:
                    distance[w] = distance[u] + 1
                    nxt.append(w)
        frontier = nxt
    edges = []
    for eid, (a, b) in known.items():
        near = min(distance.get(x, radius + 1) for x in (a, b) if x is not None)
        if near <= radius - 1 or center in (a, b):
            edges.append(Edge(eid, a, b) if b is None or a < b else Edge(eid, b, a))
    edges.sort(key=lambda e: e.eid)
    return BallView(center, radius, tuple(sorted(distance)), tuple(edges), distance)
