import numpy as np
import pytest

from src.config import AlgorithmsConfig, load_algorithms_config
from src.graph import FamilySpec, Graph, cycle, generate, regular


@pytest.fixture
def config() -> AlgorithmsConfig:
    return load_algorithms_config()


@pytest.fixture
def cycle8() -> Graph:
    return cycle(8)


@pytest.fixture
def cubic() -> Graph:
    """A random 3-regular graph on 20 nodes."""
    return regular(20, 3, np.random.default_rng(7))


@pytest.fixture
def make_regular():
    def _make(n: int, delta: int, seed: int = 1) -> Graph:
        return generate(FamilySpec(family="regular", n=n, delta=delta, seed=seed))
    return _make


@pytest.fixture(autouse=True)
def isolated_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("DSPLIT_OUTPUT_DIR", str(tmp_path / "runs"))
