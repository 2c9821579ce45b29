"""Shared fixtures for the msent test suite."""

import pytest
from hypothesis import settings
from loguru import logger

from src.graph.core import Graph
from src.utils.config import RunConfig
from tests.graphs import complete_graph, cycle_graph, path_graph

settings.register_profile("msent", deadline=None, max_examples=60)
settings.load_profile("msent")


@pytest.fixture(autouse=True)
def _quiet_logging():
    logger.remove()
    yield
    logger.remove()


@pytest.fixture
def p3() -> Graph:
    return path_graph(3)


@pytest.fixture
def c4() -> Graph:
    return cycle_graph(4)


@pytest.fixture
def k4() -> Graph:
    return complete_graph(4)


@pytest.fixture
def small_config(tmp_path) -> RunConfig:
    """Fast pipeline settings: few baselines, one worker."""
    return RunConfig(seed=7, replicas=2, workers=1, out=tmp_path / "results")
