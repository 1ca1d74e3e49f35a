"""Per-edge output artifacts and their JSON file formats."""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Optional, Union

from .errors import IncompleteAssignmentError, ParameterError

if TYPE_CHECKING:
    from .graph import Graph


class Color(str, Enum):
    RED = "R"
    BLUE = "B"

    @property
    def flipped(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED


@dataclass(frozen=True)
class Orientation:
    """Edge id -> (tail, head); half-edges point from their endpoint to None."""

    direction: Mapping[int, tuple[int, Optional[int]]]

    def missing(self, g: "Graph") -> list[int]:
        return [e.eid for e in g.edges if e.eid not in self.direction]

    def out_degrees(self, n: int) -> list[int]:
        out = [0] * n
        for tail, _ in self.direction.values():
            out[tail] += 1
        return out

    def in_degrees(self, n: int) -> list[int]:
        into = [0] * n
        for _, head in self.direction.values():
            if head is not None:
                into[head] += 1
        return into

    def reversed(self) -> "Orientation":
        return Orientation({eid: (tail, head) if head is None else (head, tail)
                            for eid, (tail, head) in self.direction.items()})

    def to_json(self) -> dict:
        return {str(eid): [tail, head] for eid, (tail, head) in sorted(self.direction.items())}

    @classmethod
    def from_json(cls, data: dict) -> "Orientation":
        return cls({int(eid): (int(pair[0]), None if pair[1] is None else int(pair[1]))
                    for eid, pair in data.items()})


def orient_by_id(g: "Graph") -> Orientation:
    """Every edge from its lower id endpoint to the higher; half-edges outward."""
    return Orientation({e.eid: (e.u, None) if e.v is None else (min(e.u, e.v), max(e.u, e.v))
                        for e in g.edges})


@dataclass(frozen=True)
class TwoColoring:
    color: Mapping[int, Color]

    def missing(self, g: "Graph") -> list[int]:
        return [e.eid for e in g.edges if e.eid not in self.color]

    def degrees(self, g: "Graph") -> tuple[list[int], list[int]]:
        red, blue = [0] * g.n, [0] * g.n
        for edge in g.edges:
            target = red if self.color[edge.eid] is Color.RED else blue
            for node in edge.endpoints():
                target[node] += 1
        return red, blue

    def max_color_degree(self, g: "Graph") -> int:
        red, blue = self.degrees(g)
        return max(red + blue, default=0)

    def to_json(self) -> dict:
        return {str(eid): c.value for eid, c in sorted(self.color.items())}

    @classmethod
    def from_json(cls, data: dict) -> "TwoColoring":
        return cls({int(eid): Color(value) for eid, value in data.items()})


@dataclass(frozen=True)
class PaletteColoring:
    palette_size: int
    color: Mapping[int, int]

    def missing(self, g: "Graph") -> list[int]:
        return [e.eid for e in g.edges if e.eid not in self.color]

    def used_colors(self) -> int:
        return len(set(self.color.values()))

    def to_json(self) -> dict:
        return {
            "palette_size": self.palette_size,
            "colors": {str(eid): c for eid, c in sorted(self.color.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "PaletteColoring":
        return cls(int(data["palette_size"]), {int(eid): int(c) for eid, c in data["colors"].items()})


@dataclass(frozen=True)
class ForestDecomposition:
    forest_of: Mapping[int, int]
    forests: int
    star_flags: tuple[bool, ...]
    active_counts: Optional[tuple[int, ...]] = field(default=None, compare=False)

    def missing(self, g: "Graph") -> list[int]:
        return [e.eid for e in g.edges if e.eid not in self.forest_of]

    def members(self, index: int) -> list[int]:
        return sorted(eid for eid, f in self.forest_of.items() if f == index)

    def to_json(self) -> dict:
        return {
            "forests": self.forests,
            "assignment": {str(eid): f for eid, f in sorted(self.forest_of.items())},
            "star_flags": list(self.star_flags),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ForestDecomposition":
        return cls({int(eid): int(f) for eid, f in data["assignment"].items()},
                   int(data["forests"]), tuple(bool(s) for s in data["star_flags"]))


Artifact = Union[Orientation, TwoColoring, PaletteColoring, ForestDecomposition]


def require_complete(g: "Graph", artifact: Artifact) -> None:
    missing = artifact.missing(g)
    if missing:
        raise IncompleteAssignmentError(
            f"{type(artifact).__name__} misses {len(missing)} edge(s), first {missing[0]}", missing)


def artifact_from_json(data: dict) -> Artifact:
    """Recognise an artifact by the shape of its JSON form."""
    if "palette_size" in data:
        return PaletteColoring.from_json(data)
    if "assignment" in data:
        return ForestDecomposition.from_json(data)
    if not data:
        raise ParameterError("cannot infer the artifact kind of an empty mapping")
    sample = next(iter(data.values()))
    if isinstance(sample, list):
        return Orientation.from_json(data)
    if isinstance(sample, str):
        return TwoColoring.from_json(data)
    raise ParameterError(f"unrecognised artifact JSON value {sample!r}")


def write_artifact(path: Path, artifact: Artifact) -> None:
    with open(path, "w") as f:
        json.dump(artifact.to_json(), f, indent=2)
        f.write("\n")


def read_artifact(path: Path) -> Artifact:
    with open(path) as f:
        return artifact_from_json(json.load(f))
