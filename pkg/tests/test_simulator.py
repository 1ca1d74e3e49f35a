import json

import numpy as np
import pytest

from src.errors import InvariantViolation, RoundLimitExceeded
from src.graph import Graph, bfs_distances, cycle, induced, path, regular
from src.simulator import NodeProgram, RunMetrics, Step, derive_seed, gather_ball, run, write_phase_log


class Silent(NodeProgram):
    name = "silent"

    def init(self, ctx):
        return Step(ctx.view.node, halted=True)

    def step(self, state, inbox, ctx):
        raise AssertionError("halted nodes are never stepped")


class Echo(NodeProgram):
    """Send the node id on every edge, then record what arrived."""

    name = "echo"

    def init(self, ctx):
        return Step(None, {eid: ctx.view.node for eid, _ in ctx.view.incident})

    def step(self, state, inbox, ctx):
        return Step(dict(inbox), halted=True)


class Forever(NodeProgram):
    name = "forever"

    def init(self, ctx):
        return Step(0)

    def step(self, state, inbox, ctx):
        return Step(state + 1)


class Rogue(NodeProgram):
    name = "rogue"

    def init(self, ctx):
        return Step(None, {99: "hello"})

    def step(self, state, inbox, ctx):
        return Step(None, halted=True)


class Draw(NodeProgram):
    name = "draw"

    def init(self, ctx):
        return Step(float(ctx.rng.random()), halted=True)

    def step(self, state, inbox, ctx):
        return Step(state, halted=True)


class LastWords(NodeProgram):
    """Node 0 halts in init yet its message is still delivered."""

    name = "last_words"

    def init(self, ctx):
        if ctx.view.node == 0:
            return Step("done", {eid: "bye" for eid, _ in ctx.view.incident}, halted=True)
        return Step(None)

    def step(self, state, inbox, ctx):
        return Step(inbox, halted=True)


class Collect(NodeProgram):
    """Flood (input, degree) pairs for a fixed number of rounds."""

    name = "collect"

    def __init__(self, rounds: int):
        self.rounds = rounds

    def init(self, ctx):
        known = {ctx.view.input: ctx.view.degree}
        if self.rounds == 0:
            return Step(known, halted=True)
        return Step(known, {eid: dict(known) for eid, _ in ctx.view.full_edges()})

    def step(self, state, inbox, ctx):
        known = dict(state)
        for message in inbox.values():
            known.update(message)
        if ctx.round >= self.rounds:
            return Step(known, halted=True)
        return Step(known, {eid: dict(known) for eid, _ in ctx.view.full_edges()})


def test_halting_in_init_costs_no_rounds(cycle8):
    states, metrics = run(cycle8, Silent(), max_rounds=5, seed=0)
    assert states == list(range(8))
    assert metrics.rounds == 0


def test_messages_arrive_next_round_and_half_edges_drop():
    g = Graph(3, [(0, 0, 1), (1, 1, 2), (2, 2, None)])
    states, metrics = run(g, Echo(), max_rounds=3, seed=0)
    assert metrics.rounds == 1
    assert metrics.messages == 4
    assert states[0] == {0: 1}
    assert states[1] == {0: 0, 1: 2}
    assert states[2] == {1: 1}


def test_halting_step_outbox_is_delivered():
    states, _ = run(path(2), LastWords(), max_rounds=2, seed=0)
    assert states[1] == {0: "bye"}


def test_round_limit_reports_partial_states(cycle8):
    with pytest.raises(RoundLimitExceeded) as info:
        run(cycle8, Forever(), max_rounds=3, seed=0)
    assert info.value.partial_states == [3] * 8
    assert info.value.metrics.rounds == 3


def test_writing_to_a_foreign_edge_is_an_invariant_violation(cycle8):
    with pytest.raises(InvariantViolation):
        run(cycle8, Rogue(), max_rounds=2, seed=0)


def test_node_randomness_is_seeded(cycle8):
    first, _ = run(cycle8, Draw(), max_rounds=0, seed=42)
    again, _ = run(cycle8, Draw(), max_rounds=0, seed=42)
    other, _ = run(cycle8, Draw(), max_rounds=0, seed=43)
    assert first == again
    assert first != other
    assert len(set(first)) == 8


def test_derive_seed_separates_labels():
    assert derive_seed(5, "mark") == derive_seed(5, "mark")
    assert derive_seed(5, "mark") != derive_seed(5, "residual")
    assert derive_seed(5, "component", 1) != derive_seed(5, "component", 2)
    assert derive_seed(5, "mark") >= 0


def test_metrics_absorb_prefixes_phases():
    inner = RunMetrics()
    inner.charge("mis", 4, 10)
    inner.max_bad_component = 7
    outer = RunMetrics()
    outer.charge("mark", 1)
    outer.absorb(inner, "cluster")
    assert outer.rounds == 5
    assert outer.messages == 10
    assert outer.per_phase_rounds == {"mark": 1, "cluster.mis": 4}
    assert outer.max_bad_component == 7
    assert outer.to_dict()["per_phase_rounds"]["cluster.mis"] == 4


def test_phase_log_is_json_lines(tmp_path):
    metrics = RunMetrics()
    metrics.charge("a", 2, 3)
    metrics.charge("b", 1)
    out = tmp_path / "phases.jsonl"
    write_phase_log(out, metrics)
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows == [{"phase": "a", "rounds": 2, "messages": 3}, {"phase": "b", "rounds": 1, "messages": 0}]


def test_gather_ball_radius_one():
    balls, metrics = gather_ball(path(5), 1)
    assert metrics.rounds == 1
    centre = balls[2]
    assert centre.nodes == (1, 2, 3)
    assert centre.edge_ids() == {1, 2}
    assert centre.distance == {2: 0, 1: 1, 3: 1}


def test_gather_ball_radius_zero_knows_own_edges():
    g = Graph(2, [(0, 0, 1), (1, 0, None)])
    balls, metrics = gather_ball(g, 0)
    assert metrics.rounds == 0
    assert balls[0].nodes == (0,)
    assert balls[0].edge_ids() == {0, 1}


def test_gather_ball_sees_whole_cycle_at_half_length():
    balls, _ = gather_ball(cycle(8), 4)
    assert all(len(ball.nodes) == 8 for ball in balls)


@pytest.mark.parametrize("rounds", [0, 1, 2, 3])
def test_final_state_depends_only_on_the_ball(rounds):
    g = regular(40, 3, np.random.default_rng(9))
    states, metrics = run(g, Collect(rounds), max_rounds=rounds, seed=4, inputs=list(g.nodes()))
    assert metrics.rounds == rounds
    for u in g.nodes():
        dist = bfs_distances(g, [u])
        ball = induced(g, [w for w in g.nodes() if dist[w] is not None and dist[w] <= rounds], boundary="half")
        local, _ = run(ball.graph, Collect(rounds), max_rounds=rounds, seed=4, inputs=list(ball.node_map))
        assert local[ball.node_map.index(u)] == states[u]
