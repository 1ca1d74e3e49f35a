"""
Exact checkers and sequential ground truth.

Every checker is a pure function of (graph, artifact). Failing checks always
carry a concrete witness: a node, an edge, an edge pair or a cycle.
"""

import itertools
import logging
import math
from typing import Any, Literal, Optional

import networkx as nx
from networkx.algorithms.flow import shortest_augmenting_path
from pydantic import BaseModel, computed_field

from .artifacts import (
    Artifact,
    Color,
    ForestDecomposition,
    Orientation,
    PaletteColoring,
    TwoColoring,
    require_complete,
)
from .config import OracleConfig, load_algorithms_config
from .errors import BudgetExceeded, ParameterError
from .graph import Graph

logger = logging.getLogger(__name__)

ENUMERATION_MAX_EDGES = 20


class Contract(BaseModel):
    kind: Literal["sinkless", "in_out_bounds", "balance", "proper", "forests"]
    d_in: Optional[int] = None
    d_out: Optional[int] = None
    t: Optional[int] = None
    star: bool = False

    @classmethod
    def parse(cls, text: str) -> "Contract":
        """Parse `sinkless`, `proper`, `balance:T`, `in_out:DIN,DOUT`, `forests` or `forests:star`."""
        name, _, arg = text.strip().partition(":")
        try:
            if name == "sinkless" and not arg:
                return cls(kind="sinkless")
            if name == "proper" and not arg:
                return cls(kind="proper")
            if name == "balance":
                return cls(kind="balance", t=int(arg))
            if name in ("in_out", "in_out_bounds"):
                d_in, d_out = (int(x) for x in arg.split(","))
                return cls(kind="in_out_bounds", d_in=d_in, d_out=d_out)
            if name == "forests" and arg in ("", "star"):
                return cls(kind="forests", star=arg == "star")
        except ValueError as exc:
            raise ParameterError(f"malformed contract {text!r}: {exc}") from exc
        raise ParameterError(f"unknown contract {text!r}")

    def label(self) -> str:
        if self.kind == "balance":
            return f"balance:{self.t}"
        if self.kind == "in_out_bounds":
            return f"in_out:{self.d_in},{self.d_out}"
        if self.kind == "forests":
            return "forests:star" if self.star else "forests"
        return self.kind


class CheckResult(BaseModel):
    name: str
    passed: bool
    witness: Optional[Any] = None


class ValidationReport(BaseModel):
    contract: str
    checks: list[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


_ARTIFACT_FOR = {
    "sinkless": Orientation,
    "in_out_bounds": Orientation,
    "balance": TwoColoring,
    "proper": PaletteColoring,
    "forests": ForestDecomposition,
}


def check(g: Graph, artifact: Artifact, contract: Contract) -> ValidationReport:
    expected = _ARTIFACT_FOR[contract.kind]
    if not isinstance(artifact, expected):
        raise ParameterError(f"contract {contract.label()} needs a {expected.__name__}, "
                             f"got {type(artifact).__name__}")
    require_complete(g, artifact)
    checks: list[CheckResult] = []
    if isinstance(artifact, Orientation):
        checks.append(_check_endpoints(g, artifact))
        if contract.kind == "sinkless":
            checks.append(_check_sinkless(g, artifact))
        else:
            checks.extend(_check_in_out(g, artifact, contract.d_in, contract.d_out))
    elif isinstance(artifact, TwoColoring):
        checks.append(_check_balance(g, artifact, contract.t))
    elif isinstance(artifact, PaletteColoring):
        checks.extend(_check_proper(g, artifact))
    else:
        checks.extend(_check_forests(g, artifact, contract.star))
    return ValidationReport(contract=contract.label(), checks=checks)


def _check_endpoints(g: Graph, orientation: Orientation) -> CheckResult:
    for edge in g.edges:
        tail, head = orientation.direction[edge.eid]
        if edge.v is None:
            ok = tail == edge.u and head is None
        else:
            ok = head is not None and {tail, head} == {edge.u, edge.v}
        if not ok:
            return CheckResult(name="orientation_endpoints", passed=False, witness={"edge": edge.eid})
    return CheckResult(name="orientation_endpoints", passed=True)


def _check_sinkless(g: Graph, orientation: Orientation) -> CheckResult:
    out = orientation.out_degrees(g.n)
    for u in g.nodes():
        if out[u] == 0:
            return CheckResult(name="sinkless", passed=False, witness={"node": u})
    return CheckResult(name="sinkless", passed=True)


def _check_in_out(g: Graph, orientation: Orientation, d_in: int, d_out: int) -> list[CheckResult]:
    results = []
    for name, degrees, bound in (
        ("out_degree", orientation.out_degrees(g.n), d_out),
        ("in_degree", orientation.in_degrees(g.n), d_in),
    ):
        witness = next(({"node": u, "degree": deg} for u, deg in enumerate(degrees) if deg > bound), None)
        results.append(CheckResult(name=f"{name}<={bound}", passed=witness is None, witness=witness))
    return results


def _check_balance(g: Graph, coloring: TwoColoring, t: int) -> CheckResult:
    red, blue = coloring.degrees(g)
    for u in g.nodes():
        if red[u] > t or blue[u] > t:
            return CheckResult(name=f"balance<={t}", passed=False,
                               witness={"node": u, "red": red[u], "blue": blue[u]})
    return CheckResult(name=f"balance<={t}", passed=True)


def _check_proper(g: Graph, coloring: PaletteColoring) -> list[CheckResult]:
    palette = CheckResult(name="palette_range", passed=True)
    for eid, c in sorted(coloring.color.items()):
        if not 0 <= c < coloring.palette_size:
            palette = CheckResult(name="palette_range", passed=False, witness={"edge": eid, "color": c})
            break
    proper = CheckResult(name="proper", passed=True)
    for u in g.nodes():
        seen: dict[int, int] = {}
        for eid, _ in g.adjacency(u):
            c = coloring.color[eid]
            if c in seen:
                proper = CheckResult(name="proper", passed=False,
                                     witness={"edges": [seen[c], eid], "node": u, "color": c})
                break
            seen[c] = eid
        if not proper.passed:
            break
    return [palette, proper]


def _check_forests(g: Graph, decomposition: ForestDecomposition, star: bool) -> list[CheckResult]:
    results = []
    bad_index = next((eid for eid, f in sorted(decomposition.forest_of.items())
                      if not 0 <= f < decomposition.forests), None)
    results.append(CheckResult(name="forest_index_range", passed=bad_index is None,
                               witness=None if bad_index is None else {"edge": bad_index}))
    if len(decomposition.star_flags) != decomposition.forests:
        results.append(CheckResult(name="star_flags_length", passed=False,
                                   witness={"flags": len(decomposition.star_flags)}))
    per_forest: dict[int, nx.MultiGraph] = {}
    for edge in g.edges:
        if edge.v is None:
            continue
        forest = per_forest.setdefault(decomposition.forest_of[edge.eid], nx.MultiGraph())
        forest.add_edge(edge.u, edge.v, key=edge.eid)
    acyclic = CheckResult(name="acyclic", passed=True)
    for index in sorted(per_forest):
        try:
            cycle = nx.find_cycle(per_forest[index])
        except nx.NetworkXNoCycle:
            continue
        acyclic = CheckResult(name="acyclic", passed=False,
                              witness={"forest": index, "cycle": sorted(key for _, _, key in cycle)})
        break
    results.append(acyclic)
    if star:
        stars = CheckResult(name="star_components", passed=True)
        for index in sorted(per_forest):
            if index >= len(decomposition.star_flags) or not decomposition.star_flags[index]:
                continue
            witness = _non_star_witness(per_forest[index])
            if witness is not None:
                stars = CheckResult(name="star_components", passed=False,
                                    witness={"forest": index, "node": witness})
                break
        results.append(stars)
    return results


def _non_star_witness(forest: nx.MultiGraph) -> Optional[int]:
    for comp in nx.connected_components(forest):
        internal = sorted(u for u in comp if forest.degree(u) > 1)
        if len(internal) > 1:
            return internal[1]
    return None


# --- sequential ground truth ----------------------------------------------------------

def euler_split(g: Graph) -> TwoColoring:
    """Alternate red/blue along Euler circuits of the graph padded with a dummy node."""
    dummy = g.n
    aug = nx.MultiGraph()
    aug.add_nodes_from(range(g.n + 1))
    for edge in g.edges:
        aug.add_edge(edge.u, dummy if edge.v is None else edge.v, key=edge.eid)
    for u in g.nodes():
        if aug.degree(u) % 2:
            aug.add_edge(u, dummy, key=("pad", u))
    color: dict[int, Color] = {}
    for comp in nx.connected_components(aug):
        sub = aug.subgraph(comp)
        if sub.number_of_edges() == 0:
            continue
        start = dummy if dummy in comp else min(comp)
        for position, (_, _, key) in enumerate(nx.eulerian_circuit(sub, source=start, keys=True)):
            if isinstance(key, int):
                color[key] = Color.RED if position % 2 == 0 else Color.BLUE
    return TwoColoring(dict(sorted(color.items())))


def _full_and_half(g: Graph) -> tuple[list[tuple[int, int, int]], list[int]]:
    full = [(e.eid, e.u, e.v) for e in g.edges if e.v is not None]
    halves = [0] * g.n
    for e in g.edges:
        if e.v is None:
            halves[e.u] += 1
    return full, halves


def _orientable(g: Graph, bound: int) -> bool:
    full, halves = _full_and_half(g)
    if any(h > bound for h in halves):
        return False
    if not full:
        return True
    network = nx.DiGraph()
    for eid, u, v in full:
        network.add_edge("s", ("e", eid), capacity=1)
        network.add_edge(("e", eid), ("v", u), capacity=1)
        network.add_edge(("e", eid), ("v", v), capacity=1)
    for u in g.nodes():
        network.add_edge(("v", u), "t", capacity=bound - halves[u])
    value = nx.maximum_flow_value(network, "s", "t", flow_func=shortest_augmenting_path)
    return value == len(full)


def min_max_outdegree_exact(g: Graph, config: Optional[OracleConfig] = None) -> int:
    """Smallest D such that some orientation has every out-degree <= D."""
    config = config or load_algorithms_config().oracles
    if g.n > config.outdegree_cap:
        raise BudgetExceeded(f"min-max out-degree oracle capped at n <= {config.outdegree_cap}, got {g.n}")
    _, halves = _full_and_half(g)
    lo, hi = max(halves, default=0), max(g.max_degree, max(halves, default=0))
    while lo < hi:
        mid = (lo + hi) // 2
        if _orientable(g, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def arboricity_exact_small(g: Graph, config: Optional[OracleConfig] = None) -> int:
    """Nash-Williams arboricity of the full edges, via densest-subgraph min cuts."""
    config = config or load_algorithms_config().oracles
    if g.n > config.arboricity_cap:
        raise BudgetExceeded(f"arboricity oracle capped at n <= {config.arboricity_cap}, got {g.n}")
    full, _ = _full_and_half(g)
    if not full:
        return 0
    bare = Graph(g.n, [(i, u, v) for i, (_, u, v) in enumerate(full)])
    k = min_max_outdegree_exact(bare, config)
    # arboricity is either the pseudoarboricity k or k + 1
    return k + 1 if _exceeds_forest_density(g.n, full, k) else k


def _exceeds_forest_density(n: int, full: list[tuple[int, int, int]], k: int) -> bool:
    """Is there a subgraph H with |E(H)| > k(|V(H)| - 1)?"""
    m = len(full)
    base = nx.DiGraph()
    for eid, u, v in full:
        base.add_edge("s", ("e", eid), capacity=1)
        base.add_edge(("e", eid), ("v", u))
        base.add_edge(("e", eid), ("v", v))
    for u in range(n):
        base.add_edge(("v", u), "t", capacity=k)
    touched = sorted({x for _, u, v in full for x in (u, v)})
    for forced in touched:
        network = base.copy()
        network.add_edge("s", ("v", forced))
        cut = nx.minimum_cut_value(network, "s", "t", flow_func=shortest_augmenting_path)
        if cut < m + k:
            return True
    return False


def _node_subsets(n: int, min_size: int):
    for size in range(min_size, n + 1):
        yield from itertools.combinations(range(n), size)


def exhaustive_min_max_outdegree(g: Graph, config: Optional[OracleConfig] = None) -> int:
    """Max over node subsets S of ceil((|E(S)| + half-edges at S) / |S|)."""
    config = config or load_algorithms_config().oracles
    if g.n > config.exhaustive_max_nodes:
        raise BudgetExceeded(f"exhaustive search capped at n <= {config.exhaustive_max_nodes}")
    full, halves = _full_and_half(g)
    best = 0
    for subset in _node_subsets(g.n, 1):
        inside = set(subset)
        count = sum(1 for _, u, v in full if u in inside and v in inside) + sum(halves[u] for u in subset)
        best = max(best, math.ceil(count / len(subset)))
    return best


def enumerate_min_max_outdegree(g: Graph) -> int:
    """Brute force over all 2^m orientations of the full edges."""
    full, halves = _full_and_half(g)
    if len(full) > ENUMERATION_MAX_EDGES:
        raise BudgetExceeded(f"orientation enumeration capped at {ENUMERATION_MAX_EDGES} edges")
    best = None
    for flips in itertools.product((False, True), repeat=len(full)):
        out = list(halves)
        for (_, u, v), flip in zip(full, flips):
            out[v if flip else u] += 1
        worst = max(out, default=0)
        best = worst if best is None else min(best, worst)
    return best or 0


def exhaustive_arboricity(g: Graph, config: Optional[OracleConfig] = None) -> int:
    config = config or load_algorithms_config().oracles
    if g.n > config.exhaustive_max_nodes:
        raise BudgetExceeded(f"exhaustive search capped at n <= {config.exhaustive_max_nodes}")
    full, _ = _full_and_half(g)
    best = 0
    for subset in _node_subsets(g.n, 2):
        inside = set(subset)
        count = sum(1 for _, u, v in full if u in inside and v in inside)
        best = max(best, math.ceil(count / (len(subset) - 1)))
    return best


def max_out_degree(orientation: Orientation, n: int) -> int:
    return max(orientation.out_degrees(n), default=0)
