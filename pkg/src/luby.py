"""
Randomized maximal k-independent sets on the engine.

Each iteration takes 2k rounds: undecided nodes draw a random rank, the minimum
rank is flooded for k hops, nodes holding their k-hop minimum join, and a join
flag is flooded for k hops to knock out everything within distance k.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from .graph import Graph
from .simulator import NodeProgram, RunMetrics, Step, StepContext, run

logger = logging.getLogger(__name__)

NO_RANK = (2.0, -1)

UNDECIDED, MEMBER, EXCLUDED = "undecided", "member", "excluded"


@dataclass
class _MISState:
    status: str = UNDECIDED
    rank: tuple = NO_RANK
    best: tuple = NO_RANK
    near_member: bool = False
    saw_undecided: bool = True


class KHopMISProgram(NodeProgram):
    name = "mis"

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k

    def init(self, ctx: StepContext) -> Step:
        state = _MISState()
        self._draw(state, ctx)
        return Step(state, self._send(ctx, state.best))

    def step(self, state: _MISState, inbox, ctx: StepContext) -> Step:
        offset = (ctx.round - 1) % (2 * self.k) + 1
        if offset <= self.k:
            for rank in inbox.values():
                state.best = min(state.best, rank)
            if offset < self.k:
                return Step(state, self._send(ctx, state.best))
            state.saw_undecided = state.best != NO_RANK
            joined = state.status == UNDECIDED and state.best == state.rank
            if joined:
                state.status = MEMBER
            state.near_member = joined
            return Step(state, self._send(ctx, state.near_member))
        for flag in inbox.values():
            state.near_member = state.near_member or flag
        if offset < 2 * self.k:
            return Step(state, self._send(ctx, state.near_member))
        if state.status == UNDECIDED and state.near_member:
            state.status = EXCLUDED
        if not state.saw_undecided:
            return Step(state, halted=True)
        self._draw(state, ctx)
        return Step(state, self._send(ctx, state.best))

    @staticmethod
    def _draw(state: _MISState, ctx: StepContext) -> None:
        state.near_member = False
        if state.status == UNDECIDED:
            state.rank = (float(ctx.rng.random()), ctx.view.node)
        else:
            state.rank = NO_RANK
        state.best = state.rank

    @staticmethod
    def _send(ctx: StepContext, payload) -> dict:
        return {eid: payload for eid, _ in ctx.view.full_edges()}


def maximal_independent_set(
    g: Graph, k: int = 1, seed: int = 0, max_rounds: Optional[int] = None
) -> tuple[list[int], RunMetrics]:
    """Members of a maximal k-independent set: pairwise distance > k, and every
    node is within distance k of a member."""
    limit = max_rounds if max_rounds is not None else 2 * k * (8 * max(g.n, 2).bit_length() + 64)
    states, metrics = run(g, KHopMISProgram(k), max_rounds=limit, seed=seed)
    members = [u for u, s in enumerate(states) if s.status == MEMBER]
    logger.debug("k=%d MIS on %d nodes: %d members in %d rounds", k, g.n, len(members), metrics.rounds)
    return members, metrics


def conflict_graph(count: int, conflicts: Iterable[tuple[int, int]]) -> Graph:
    """Simple graph on `count` candidates with one edge per conflicting pair."""
    pairs = sorted({(min(a, b), max(a, b)) for a, b in conflicts if a != b})
    return Graph(count, [(eid, a, b) for eid, (a, b) in enumerate(pairs)])
