"""Configuration loading and validation."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field

from .errors import ParameterError


class SimulatorConfig(BaseModel):
    default_max_rounds: int = Field(100_000, ge=0)


class SinklessConfig(BaseModel):
    mark_probability: float = Field(0.25, gt=0.0, lt=1.0)
    # Random fast path fires when min degree >= fast_path_c1 * ln n.
    fast_path_c1: float = Field(4.0, gt=0.0)
    high_degree_threshold: int = Field(500, ge=3)
    # Components up to this size are solved from gathered balls on the engine.
    gather_limit: int = Field(200, ge=1)
    # Search steps per edge when looking for its least short cycle.
    cycle_enumeration_cap: int = Field(200_000, ge=1)
    shatter_constant: float = Field(1.0, gt=0.0)
    round_constant: float = Field(6.0, gt=0.0)


class SplitConfig(BaseModel):
    log_base: float = Field(1.5, gt=1.0)
    step_multiplier: float = Field(16.0 / 3.0, gt=0.0)
    regime_constant: float = Field(4.0, gt=0.0)
    high_degree_constant: float = Field(32.0, gt=0.0)
    copy_degree_constant: float = Field(4.0, gt=0.0)
    iteration_cap_factor: float = Field(10.0, gt=0.0)
    path_length_constant: float = Field(3.0, gt=0.0)
    luby_max_nodes: int = Field(60, ge=1)
    luby_max_length: int = Field(10, ge=1)
    luby_max_candidates: int = Field(20_000, ge=1)


class ColoringConfig(BaseModel):
    # Coarse recursion bottoms out once delta <= base_threshold_factor * x.
    base_threshold_factor: int = Field(2, ge=1)
    randomized_min_delta: int = Field(64, ge=2)
    x_constant: float = Field(18.0, gt=0.0)
    bad_component_factor: float = Field(8.0, gt=0.0)
    # randomized_color hands graphs with delta >= constant * ln(n)^2 to fine_color.
    fine_branch_constant: float = Field(1.0, gt=0.0)


class OrientationConfig(BaseModel):
    path_length_constant: float = Field(3.0, gt=0.0)
    forest_constant: float = Field(1.0, gt=0.0)
    forest_retries: int = Field(5, ge=1)
    luby_max_nodes: int = Field(60, ge=1)
    luby_max_candidates: int = Field(20_000, ge=1)


class OracleConfig(BaseModel):
    outdegree_cap: int = Field(2000, ge=1)
    arboricity_cap: int = Field(500, ge=1)
    exhaustive_max_nodes: int = Field(10, ge=1)


class AlgorithmsConfig(BaseModel):
    simulator: SimulatorConfig = SimulatorConfig()
    sinkless: SinklessConfig = SinklessConfig()
    split: SplitConfig = SplitConfig()
    coloring: ColoringConfig = ColoringConfig()
    orientation: OrientationConfig = OrientationConfig()
    oracles: OracleConfig = OracleConfig()


class MatrixEntry(BaseModel):
    algorithm: str
    family: str
    n: list[int]
    delta: Optional[list[int]] = None
    a: Optional[list[int]] = None
    p: Optional[float] = None
    eps: list[float] = [0.5]
    x: Optional[int] = None
    mode: Optional[str] = None
    seeds: list[int] = [1]


class ExperimentMatrix(BaseModel):
    name: str
    description: Optional[str] = None
    entries: list[MatrixEntry]


class ExperimentsConfig(BaseModel):
    matrices: list[ExperimentMatrix]


def get_config_dir() -> Path:
    return Path(__file__).parent.parent / "config"


def get_data_dir() -> Path:
    data_dir = Path(__file__).parent.parent / "data"
    data_dir.mkdir(exist_ok=True)
    return data_dir


def get_output_dir() -> Path:
    """Default directory for run artifacts; DSPLIT_OUTPUT_DIR overrides it."""
    override = os.environ.get("DSPLIT_OUTPUT_DIR")
    out_dir = Path(override) if override else get_data_dir() / "runs"
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def load_algorithms_config(path: Optional[Path] = None) -> AlgorithmsConfig:
    if path is not None:
        return _read_algorithms_config(Path(path))
    return _default_algorithms_config()


@lru_cache(maxsize=1)
def _default_algorithms_config() -> AlgorithmsConfig:
    return _read_algorithms_config(get_config_dir() / "algorithms.yaml")


def _read_algorithms_config(config_path: Path) -> AlgorithmsConfig:
    if not config_path.exists():
        return AlgorithmsConfig()
    with open(config_path) as f:
        data = yaml.safe_load(f) or {}
    return AlgorithmsConfig(**data)


def load_experiments_config() -> ExperimentsConfig:
    config_path = get_config_dir() / "experiments.yaml"
    with open(config_path) as f:
        data = yaml.safe_load(f)
    return ExperimentsConfig(**data)


def load_experiment_matrix(name: str) -> ExperimentMatrix:
    config = load_experiments_config()
    for matrix in config.matrices:
        if matrix.name == name:
            return matrix
    known = ", ".join(m.name for m in config.matrices)
    raise ParameterError(f"unknown experiment matrix {name!r} (known: {known})")
