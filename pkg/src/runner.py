"""Experiment specs, the algorithm registry and single-run / bench execution."""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Optional

from pydantic import BaseModel, Field, model_validator

from .artifacts import Artifact, Orientation, PaletteColoring
from .coloring import base_color, choose_x, coarse_color, fine_color, randomized_color
from .config import AlgorithmsConfig, MatrixEntry, load_algorithms_config
from .errors import ParameterError
from .graph import FamilySpec, Graph, generate
from .oracles import CheckResult, Contract, ValidationReport, check, euler_split, max_out_degree
from .orientation import (
    FLOW_MODES,
    arboricity_orient,
    directed_split_deterministic,
    directed_split_randomized,
    forest_decompose,
)
from .simulator import RunMetrics
from .sinkless import deterministic_sinkless, shatter_and_finish, sinkless_dispatch
from .splitting import balanced_split_high, balanced_split_low, balanced_split_randomized

logger = logging.getLogger(__name__)

SPLIT_MODES = ("greedy-sequential", "luby-supergraph")
X_RULES = ("fixed", "delta_pow", "log_pow", "exp_inv")


class ExperimentSpec(BaseModel):
    """One algorithm on one graph family, over a list of seeds."""

    graph: FamilySpec
    algorithm: str
    eps: Optional[float] = Field(None, gt=0.0, lt=1.0)
    x: Optional[int] = Field(None, ge=2)
    x_rule: str = "fixed"
    a: Optional[int] = Field(None, ge=1)
    mode: Optional[str] = None
    seeds: list[int] = [0]
    max_rounds: Optional[int] = Field(None, ge=0)
    out: Optional[Path] = None

    @model_validator(mode="after")
    def _compatible(self) -> "ExperimentSpec":
        entry = ALGORITHMS.get(self.algorithm)
        if entry is None:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; known: {', '.join(sorted(ALGORITHMS))}")
        if "eps" in entry.needs and self.eps is None:
            raise ValueError(f"{self.algorithm} needs --eps")
        if "x" in entry.needs:
            if self.x_rule not in X_RULES:
                raise ValueError(f"unknown x rule {self.x_rule!r}")
            if self.x_rule == "fixed" and self.x is None:
                raise ValueError(f"{self.algorithm} needs --x (or a non-fixed --x-rule with --eps)")
            if self.x_rule != "fixed" and self.eps is None:
                raise ValueError(f"x rule {self.x_rule!r} needs --eps")
        if "a" in entry.needs and self.a is None and self.graph.a is None:
            raise ValueError(f"{self.algorithm} needs --a")
        if self.mode is not None and self.mode not in entry.modes:
            allowed = ", ".join(entry.modes) or "none"
            raise ValueError(f"{self.algorithm} does not take mode {self.mode!r} (allowed: {allowed})")
        return self

    @property
    def arboricity(self) -> Optional[int]:
        return self.a if self.a is not None else self.graph.a


Runner = Callable[[Graph, ExperimentSpec, int, AlgorithmsConfig, RunMetrics], tuple[Artifact, Contract]]


@dataclass(frozen=True)
class AlgorithmEntry:
    run: Runner
    needs: frozenset[str] = frozenset()
    modes: tuple[str, ...] = ()


def _balance(bound: int) -> Contract:
    return Contract(kind="balance", t=bound)


def _both(bound: int) -> Contract:
    return Contract(kind="in_out_bounds", d_in=bound, d_out=bound)


def _run_sinkless(g, spec, seed, config, metrics):
    orientation, run_metrics = sinkless_dispatch(g, seed, config.sinkless)
    metrics.absorb(run_metrics)
    return orientation, Contract(kind="sinkless")


def _run_shatter(g, spec, seed, config, metrics):
    return shatter_and_finish(g, seed, config.sinkless, metrics), Contract(kind="sinkless")


def _run_deterministic_sinkless(g, spec, seed, config, metrics):
    return deterministic_sinkless(g, g.min_degree, config.sinkless, metrics, seed), Contract(kind="sinkless")


def _run_split_low(g, spec, seed, config, metrics):
    coloring = balanced_split_low(g, spec.eps, config.split, metrics=metrics)
    return coloring, _balance(math.floor((1 + spec.eps) * g.max_degree / 2))


def _run_split_high(g, spec, seed, config, metrics):
    coloring = balanced_split_high(g, spec.eps, config.split, metrics)
    return coloring, _balance(math.floor((1 + spec.eps) * g.max_degree / 2))


def _run_split_randomized(g, spec, seed, config, metrics):
    coloring = balanced_split_randomized(g, spec.eps, seed, spec.mode or "greedy-sequential", config.split, metrics)
    return coloring, _balance(math.ceil((1 + spec.eps) * g.max_degree / 2))


def _run_euler(g, spec, seed, config, metrics):
    return euler_split(g), _balance(g.max_degree // 2 + 1)


def _run_base_color(g, spec, seed, config, metrics):
    return base_color(g, seed, metrics), Contract(kind="proper")


def _run_coarse_color(g, spec, seed, config, metrics):
    x = choose_x(g.max_degree, spec.eps, spec.x_rule, spec.x)
    return coarse_color(g, x, seed, config.coloring, metrics), Contract(kind="proper")


def _run_fine_color(g, spec, seed, config, metrics):
    return fine_color(g, spec.eps, seed, config.split, metrics), Contract(kind="proper")


def _run_randomized_color(g, spec, seed, config, metrics):
    coloring = randomized_color(g, spec.eps, seed, config.coloring, config.split, metrics, x=spec.x)
    return coloring, Contract(kind="proper")


def _run_arboricity(g, spec, seed, config, metrics):
    orientation, _ = arboricity_orient(g, spec.arboricity, spec.eps, spec.mode or "blocking-greedy", seed,
                                       config.orientation, metrics)
    bound = math.ceil((1 + spec.eps) * spec.arboricity)
    return orientation, Contract(kind="in_out_bounds", d_in=max(g.max_degree, bound), d_out=bound)


def _run_directed_randomized(g, spec, seed, config, metrics):
    orientation = directed_split_randomized(g, spec.eps, spec.mode or "blocking-greedy", seed,
                                            config.orientation, metrics)
    return orientation, _both(math.ceil((1 + spec.eps) * g.max_degree / 2))


def _run_directed_deterministic(g, spec, seed, config, metrics):
    orientation = directed_split_deterministic(g, spec.eps, config.split, metrics)
    return orientation, _both(math.floor((1 + spec.eps) * g.max_degree / 2))


def _run_forests(g, spec, seed, config, metrics):
    orientation, _ = arboricity_orient(g, spec.arboricity, spec.eps, "blocking-greedy", seed,
                                       config.orientation, metrics)
    decomposition = forest_decompose(g, orientation, spec.arboricity, spec.eps, seed, config.orientation, metrics)
    return decomposition, Contract(kind="forests", star=True)


ALGORITHMS: dict[str, AlgorithmEntry] = {
    "sinkless": AlgorithmEntry(_run_sinkless),
    "shatter_sinkless": AlgorithmEntry(_run_shatter),
    "deterministic_sinkless": AlgorithmEntry(_run_deterministic_sinkless),
    "split_low": AlgorithmEntry(_run_split_low, frozenset({"eps"})),
    "split_high": AlgorithmEntry(_run_split_high, frozenset({"eps"})),
    "split_randomized": AlgorithmEntry(_run_split_randomized, frozenset({"eps"}), SPLIT_MODES),
    "euler_split": AlgorithmEntry(_run_euler),
    "base_color": AlgorithmEntry(_run_base_color),
    "coarse_color": AlgorithmEntry(_run_coarse_color, frozenset({"x"})),
    "fine_color": AlgorithmEntry(_run_fine_color, frozenset({"eps"})),
    "randomized_color": AlgorithmEntry(_run_randomized_color, frozenset({"eps"})),
    "arboricity_orient": AlgorithmEntry(_run_arboricity, frozenset({"eps", "a"}), FLOW_MODES),
    "directed_split_randomized": AlgorithmEntry(_run_directed_randomized, frozenset({"eps"}), FLOW_MODES),
    "directed_split_deterministic": AlgorithmEntry(_run_directed_deterministic, frozenset({"eps"})),
    "forest_decompose": AlgorithmEntry(_run_forests, frozenset({"eps", "a"})),
}


# --- execution -------------------------------------------------------------------------------

def parse_seeds(text: str) -> list[int]:
    """`7`, `1..20` (inclusive) or `1,4,9`."""
    text = text.strip()
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            if high < low:
                raise ParameterError(f"empty seed range {text!r}")
            return list(range(low, high + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ParameterError(f"malformed seed list {text!r}") from exc


def apply_overrides(config: AlgorithmsConfig, assignments: list[str]) -> AlgorithmsConfig:
    """Apply `section.field=value` overrides, re-validating the touched section."""
    for assignment in assignments:
        key, sep, value = assignment.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not hasattr(config, section):
            raise ParameterError(f"malformed override {assignment!r}; expected section.field=value")
        current = getattr(config, section)
        if name not in type(current).model_fields:
            raise ParameterError(f"unknown setting {key!r}")
        updated = type(current).model_validate({**current.model_dump(), name: value})
        config = config.model_copy(update={section: updated})
    return config


@dataclass
class RunRecord:
    spec: ExperimentSpec
    seed: int
    graph: Graph
    artifact: Artifact
    metrics: RunMetrics
    report: ValidationReport

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_json(self) -> dict:
        return {
            "graph": self.spec.graph.model_dump(),
            "algorithm": self.spec.algorithm,
            "seed": self.seed,
            "artifact": self.artifact.to_json(),
            "metrics": self.metrics.to_dict(),
            "report": self.report.model_dump(),
        }


def run_experiment(spec: ExperimentSpec, seed: int, config: Optional[AlgorithmsConfig] = None,
                   graph: Optional[Graph] = None) -> RunRecord:
    config = config or load_algorithms_config()
    g = graph if graph is not None else generate(spec.graph)
    metrics = RunMetrics()
    logger.info("%s on %s, seed %d", spec.algorithm, spec.graph.label(), seed)
    artifact, contract = ALGORITHMS[spec.algorithm].run(g, spec, seed, config, metrics)
    report = check(g, artifact, contract)
    if spec.max_rounds is not None:
        within = metrics.rounds <= spec.max_rounds
        report.checks.append(CheckResult(name=f"rounds<={spec.max_rounds}", passed=within,
                                         witness=None if within else {"rounds": metrics.rounds}))
    return RunRecord(spec, seed, g, artifact, metrics, report)


class BenchRow(BaseModel):
    sweep: str
    algorithm: str
    family: str
    n: int
    delta: int
    a: Optional[int] = None
    eps: Optional[float] = None
    seed: int
    rounds: int
    messages: int
    passed: bool
    palette_size: Optional[int] = None
    max_out_degree: Optional[int] = None
    max_bad_component: Optional[int] = None


def bench_row(record: RunRecord, sweep: str) -> BenchRow:
    artifact = record.artifact
    return BenchRow(
        sweep=sweep,
        algorithm=record.spec.algorithm,
        family=record.spec.graph.family,
        n=record.graph.n,
        delta=record.graph.max_degree,
        a=record.spec.arboricity,
        eps=record.spec.eps,
        seed=record.seed,
        rounds=record.metrics.rounds,
        messages=record.metrics.messages,
        passed=record.passed,
        palette_size=artifact.palette_size if isinstance(artifact, PaletteColoring) else None,
        max_out_degree=max_out_degree(artifact, record.graph.n) if isinstance(artifact, Orientation) else None,
        max_bad_component=record.metrics.max_bad_component,
    )


def expand_entry(entry: MatrixEntry) -> Iterator[ExperimentSpec]:
    """One spec per (n, delta or a, eps) combination; seeds stay grouped."""
    sizes = entry.delta or entry.a or [None]
    for n in entry.n:
        for size in sizes:
            for eps in entry.eps:
                graph = FamilySpec(
                    family=entry.family, n=n, p=entry.p,
                    delta=size if entry.delta else None,
                    a=size if entry.a else None,
                )
                yield ExperimentSpec(graph=graph, algorithm=entry.algorithm, eps=eps, x=entry.x,
                                     mode=entry.mode, seeds=entry.seeds)


def run_bench(specs: list[ExperimentSpec], sweep: str, config: Optional[AlgorithmsConfig] = None,
              graph_seeded: bool = True) -> Iterator[BenchRow]:
    """Run every spec over its seeds. With graph_seeded the seed also draws the graph."""
    for spec in specs:
        for seed in spec.seeds:
            seeded = spec.model_copy(update={"graph": spec.graph.model_copy(update={"seed": seed})}) \
                if graph_seeded else spec
            yield bench_row(run_experiment(seeded, seed, config), sweep)


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
