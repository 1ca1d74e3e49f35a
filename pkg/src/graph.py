"""
Multigraphs with half-edges, experiment generators and copy-node virtualization.

A half-edge is an edge with a single endpoint; its missing endpoint is the HALF
sentinel (None). Node ids are dense 0..n-1 and edge ids dense 0..m-1.
"""

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence, Union

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field, model_validator

from .artifacts import Orientation, PaletteColoring, TwoColoring
from .errors import IncompleteAssignmentError, InvariantViolation, ParameterError

logger = logging.getLogger(__name__)

HALF = None

REGULAR_MAX_ATTEMPTS = 200


@dataclass(frozen=True)
class Edge:
    eid: int
    u: int
    v: Optional[int]

    @property
    def is_half(self) -> bool:
        return self.v is None

    def other(self, node: int) -> Optional[int]:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise ValueError(f"node {node} is not an endpoint of edge {self.eid}")

    def endpoints(self) -> tuple[int, ...]:
        return (self.u,) if self.v is None else (self.u, self.v)


EdgeLike = Union[Edge, Sequence]


class Graph:
    """Immutable undirected multigraph; adjacency lists are sorted by edge id."""

    def __init__(self, n: int, edges: Iterable[EdgeLike] = ()):
        if n < 0:
            raise ParameterError(f"node count must be non-negative, got {n}")
        self.n = n
        parsed: list[Edge] = []
        for item in edges:
            edge = item if isinstance(item, Edge) else Edge(int(item[0]), int(item[1]),
                                                            None if item[2] is None else int(item[2]))
            parsed.append(edge)
        parsed.sort(key=lambda e: e.eid)
        for expected, edge in enumerate(parsed):
            if edge.eid != expected:
                raise ParameterError(f"edge ids must be dense 0..m-1; found {edge.eid} at position {expected}")
            for node in edge.endpoints():
                if not 0 <= node < n:
                    raise ParameterError(f"edge {edge.eid} has endpoint {node} outside 0..{n - 1}")
            if edge.u == edge.v:
                raise ParameterError(f"self-loop rejected on edge {edge.eid} at node {edge.u}")
        self.edges: tuple[Edge, ...] = tuple(parsed)
        adjacency: list[list[tuple[int, Optional[int]]]] = [[] for _ in range(n)]
        for edge in self.edges:
            adjacency[edge.u].append((edge.eid, edge.v))
            if edge.v is not None:
                adjacency[edge.v].append((edge.eid, edge.u))
        self._adjacency = tuple(tuple(entries) for entries in adjacency)

    @property
    def m(self) -> int:
        return len(self.edges)

    def nodes(self) -> range:
        return range(self.n)

    def edge(self, eid: int) -> Edge:
        return self.edges[eid]

    def adjacency(self, node: int) -> tuple[tuple[int, Optional[int]], ...]:
        return self._adjacency[node]

    def degree(self, node: int) -> int:
        return len(self._adjacency[node])

    def degrees(self) -> list[int]:
        return [len(entries) for entries in self._adjacency]

    @property
    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    @property
    def min_degree(self) -> int:
        return min(self.degrees(), default=0)

    def neighbors(self, node: int) -> list[int]:
        return [other for _, other in self._adjacency[node] if other is not None]

    def half_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.is_half]

    def is_regular(self) -> bool:
        return self.n == 0 or self.max_degree == self.min_degree

    def audit(self) -> None:
        """Re-derive adjacency from the edge list and compare."""
        expected: list[list[tuple[int, Optional[int]]]] = [[] for _ in range(self.n)]
        for edge in self.edges:
            expected[edge.u].append((edge.eid, edge.v))
            if edge.v is not None:
                expected[edge.v].append((edge.eid, edge.u))
        for node in range(self.n):
            if tuple(expected[node]) != self._adjacency[node]:
                raise InvariantViolation(f"adjacency of node {node} disagrees with the edge list", witness=node)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [[e.eid, e.u, e.v] for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        if "n" not in data or "edges" not in data:
            raise ParameterError("graph JSON needs 'n' and 'edges'")
        return cls(int(data["n"]), [tuple(item) for item in data["edges"]])

    def to_networkx(self) -> nx.MultiGraph:
        """Full edges keyed by edge id; half-edges kept as a node attribute."""
        graph = nx.MultiGraph()
        graph.add_nodes_from((u, {"half_edges": []}) for u in range(self.n))
        for edge in self.edges:
            if edge.v is None:
                graph.nodes[edge.u]["half_edges"].append(edge.eid)
            else:
                graph.add_edge(edge.u, edge.v, key=edge.eid)
        return graph

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, max_degree={self.max_degree})"


@dataclass(frozen=True)
class Subgraph:
    """A relabelled piece of a larger graph with maps back to the original ids."""

    graph: Graph
    node_map: tuple[int, ...]
    edge_map: tuple[int, ...]


def induced(g: Graph, nodes: Iterable[int], boundary: Literal["half", "drop"] = "half") -> Subgraph:
    """Subgraph on `nodes`; edges leaving the set become half-edges or are dropped."""
    keep = sorted(set(nodes))
    index = {u: i for i, u in enumerate(keep)}
    edges: list[tuple[int, int, Optional[int]]] = []
    edge_map: list[int] = []
    for edge in g.edges:
        inside = [index[x] for x in edge.endpoints() if x in index]
        if edge.v is None:
            if inside:
                edges.append((len(edges), inside[0], None))
                edge_map.append(edge.eid)
        elif len(inside) == 2:
            edges.append((len(edges), inside[0], inside[1]))
            edge_map.append(edge.eid)
        elif len(inside) == 1 and boundary == "half":
            edges.append((len(edges), inside[0], None))
            edge_map.append(edge.eid)
    return Subgraph(Graph(len(keep), edges), tuple(keep), tuple(edge_map))


def edge_subgraph(g: Graph, eids: Iterable[int]) -> Subgraph:
    """Subgraph spanned by the given edges, on the nodes they touch."""
    chosen = sorted(set(eids))
    touched = sorted({x for eid in chosen for x in g.edge(eid).endpoints()})
    index = {u: i for i, u in enumerate(touched)}
    edges = []
    for new_eid, eid in enumerate(chosen):
        edge = g.edge(eid)
        edges.append((new_eid, index[edge.u], None if edge.v is None else index[edge.v]))
    return Subgraph(Graph(len(touched), edges), tuple(touched), tuple(chosen))


def components(g: Graph, nodes: Optional[Iterable[int]] = None) -> list[list[int]]:
    """Connected components (over full edges) restricted to `nodes`, each sorted."""
    allowed = set(g.nodes()) if nodes is None else set(nodes)
    seen: set[int] = set()
    result = []
    for start in sorted(allowed):
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for other in g.neighbors(u):
                if other in allowed and other not in seen:
                    seen.add(other)
                    comp.append(other)
                    queue.append(other)
        result.append(sorted(comp))
    return result


def bfs_distances(g: Graph, sources: Iterable[int]) -> list[Optional[int]]:
    dist: list[Optional[int]] = [None] * g.n
    queue = deque()
    for s in sources:
        if dist[s] is None:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        for other in g.neighbors(u):
            if dist[other] is None:
                dist[other] = dist[u] + 1
                queue.append(other)
    return dist


# --- generators -----------------------------------------------------------

class FamilySpec(BaseModel):
    """Descriptor of a generated experiment graph."""

    family: Literal["cycle", "clique", "regular", "gnp", "forest_union", "tree"]
    n: int = Field(ge=1)
    delta: Optional[int] = None
    p: Optional[float] = None
    a: Optional[int] = None
    seed: int = 0

    @model_validator(mode="after")
    def _required_parameters(self) -> "FamilySpec":
        required = {"regular": "delta", "gnp": "p", "forest_union": "a"}.get(self.family)
        if required and getattr(self, required) is None:
            raise ValueError(f"family {self.family!r} requires parameter {required!r}")
        return self

    def label(self) -> str:
        parts = [self.family, f"n={self.n}"]
        for name in ("delta", "p", "a"):
            value = getattr(self, name)
            if value is not None:
                parts.append(f"{name}={value}")
        return " ".join(parts)


def generate(spec: FamilySpec) -> Graph:
    rng = np.random.default_rng(spec.seed)
    if spec.family == "cycle":
        return cycle(spec.n)
    if spec.family == "clique":
        return clique(spec.n)
    if spec.family == "regular":
        return regular(spec.n, spec.delta, rng)
    if spec.family == "gnp":
        return gnp(spec.n, spec.p, rng)
    if spec.family == "forest_union":
        return forest_union(spec.n, spec.a, rng)
    return random_tree(spec.n, rng)


def _from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> Graph:
    return Graph(n, [(eid, u, v) for eid, (u, v) in enumerate(pairs)])


def cycle(n: int) -> Graph:
    if n < 2:
        raise ParameterError("a cycle needs at least 2 nodes")
    return _from_pairs(n, [(i, (i + 1) % n) if i + 1 < n else (0, n - 1) for i in range(n)])


def clique(n: int) -> Graph:
    return _from_pairs(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n: int) -> Graph:
    return _from_pairs(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> Graph:
    return _from_pairs(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def regular(n: int, delta: int, rng: np.random.Generator) -> Graph:
    """Simple delta-regular graph via the configuration model with resampling."""
    if (n * delta) % 2 != 0:
        raise ParameterError(f"regular graph needs n*delta even (n={n}, delta={delta})")
    if not 0 <= delta < n:
        raise ParameterError(f"regular graph needs 0 <= delta < n (n={n}, delta={delta})")
    for attempt in range(REGULAR_MAX_ATTEMPTS):
        pairs = _pair_stubs(n, delta, rng)
        if pairs is not None:
            if attempt:
                logger.debug("regular(%d, %d) succeeded after %d retries", n, delta, attempt)
            return _from_pairs(n, sorted(pairs))
    raise ParameterError(f"no simple {delta}-regular graph on {n} nodes after {REGULAR_MAX_ATTEMPTS} attempts")


def _pair_stubs(n: int, delta: int, rng: np.random.Generator) -> Optional[set[tuple[int, int]]]:
    pairs: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), delta)
    while stubs.size:
        leftover: dict[int, int] = {}
        rng.shuffle(stubs)
        for s1, s2 in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in pairs:
                pairs.add((s1, s2))
            else:
                leftover[s1] = leftover.get(s1, 0) + 1
                leftover[s2] = leftover.get(s2, 0) + 1
        if leftover and not _has_suitable_pair(pairs, leftover):
            return None
        stubs = np.array([node for node, count in leftover.items() for _ in range(count)], dtype=np.int64)
    return pairs


def _has_suitable_pair(pairs: set[tuple[int, int]], leftover: dict[int, int]) -> bool:
    nodes = list(leftover)
    for i, s1 in enumerate(nodes):
        for s2 in nodes[:i]:
            if (min(s1, s2), max(s1, s2)) not in pairs:
                return True
    return False


def gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    rows, cols = np.triu_indices(n, k=1)
    mask = rng.random(rows.size) < p
    return _from_pairs(n, zip(rows[mask].tolist(), cols[mask].tolist()))


def _prufer_tree_pairs(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Uniform random labelled spanning tree on n nodes by Prüfer decoding."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    sequence = rng.integers(0, n, size=n - 2).tolist()
    remaining = [1] * n
    for x in sequence:
        remaining[x] += 1
    leaves = [u for u in range(n) if remaining[u] == 1]
    heapq.heapify(leaves)
    pairs = []
    for x in sequence:
        leaf = heapq.heappop(leaves)
        pairs.append((min(leaf, x), max(leaf, x)))
        remaining[x] -= 1
        if remaining[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    pairs.append((min(u, v), max(u, v)))
    return sorted(pairs)


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    return _from_pairs(n, _prufer_tree_pairs(n, rng))


def forest_union(n: int, a: int, rng: np.random.Generator) -> Graph:
    """Edge-union of `a` uniform random spanning trees; arboricity <= a."""
    if a < 1:
        raise ParameterError(f"forest_union needs a >= 1, got {a}")
    pairs: list[tuple[int, int]] = []
    for _ in range(a):
        pairs.extend(_prufer_tree_pairs(n, rng))
    return _from_pairs(n, pairs)


# --- copy-node virtualization ------------------------------------------------

@dataclass(frozen=True)
class VirtualizationMap:
    copy_to_original: tuple[int, ...]
    edge_endpoints: tuple[tuple[int, Optional[int]], ...]
    copies: tuple[tuple[int, ...], ...]
    d: int

    def original(self, copy: Optional[int]) -> Optional[int]:
        return None if copy is None else self.copy_to_original[copy]

    @property
    def is_identity(self) -> bool:
        return all(len(c) == 1 and c[0] == u for u, c in enumerate(self.copies))


def virtualize(g: Graph, d: int) -> tuple[Graph, VirtualizationMap]:
    """Split every node into ceil(deg/d) copy-nodes of degree d (the last one may be smaller)."""
    if d < 1:
        raise ParameterError(f"copy degree must be >= 1, got {d}")
    copy_to_original: list[int] = []
    copies: list[tuple[int, ...]] = []
    slot: dict[tuple[int, int], int] = {}
    for u in g.nodes():
        incident = g.adjacency(u)
        count = max(1, math.ceil(len(incident) / d))
        base = len(copy_to_original)
        copy_to_original.extend([u] * count)
        copies.append(tuple(range(base, base + count)))
        for position, (eid, _) in enumerate(incident):
            slot[(u, eid)] = base + position // d
    endpoints = []
    for edge in g.edges:
        cu = slot[(edge.u, edge.eid)]
        cv = None if edge.v is None else slot[(edge.v, edge.eid)]
        endpoints.append((cu, cv))
    copy_graph = Graph(len(copy_to_original), [(eid, cu, cv) for eid, (cu, cv) in enumerate(endpoints)])
    vmap = VirtualizationMap(tuple(copy_to_original), tuple(endpoints), tuple(copies), d)
    logger.debug("virtualized %d nodes into %d copies at d=%d", g.n, copy_graph.n, d)
    return copy_graph, vmap


def devirtualize(assignment, vmap: VirtualizationMap):
    """Carry a per-edge assignment on the copy graph back to the original graph."""
    m = len(vmap.edge_endpoints)
    if isinstance(assignment, Orientation):
        values = assignment.direction
    elif isinstance(assignment, TwoColoring):
        values = assignment.color
    elif isinstance(assignment, PaletteColoring):
        values = assignment.color
    else:
        raise TypeError(f"cannot devirtualize {type(assignment).__name__}")
    missing = [eid for eid in range(m) if eid not in values]
    if missing:
        raise IncompleteAssignmentError(f"assignment misses {len(missing)} edge(s) of the copy graph", missing)
    if isinstance(assignment, Orientation):
        return Orientation({eid: (vmap.original(tail), vmap.original(head))
                            for eid, (tail, head) in assignment.direction.items()})
    if isinstance(assignment, TwoColoring):
        return TwoColoring(dict(assignment.color))
    return PaletteColoring(assignment.palette_size, dict(assignment.color))
