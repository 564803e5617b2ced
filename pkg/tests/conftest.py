"""Pytest configuration and shared fixtures."""

import json
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from wishart_mask_lab.config import Config
from wishart_mask_lab.graphs import (
    Graph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    star_graph,
)
from wishart_mask_lab.seeding import make_rng

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def k4():
    """Complete graph on 4 vertices."""
    return complete_graph(4)


@pytest.fixture
def k23():
    """K_{2,3} with left side {0, 1}."""
    return complete_bipartite(2, 3)


@pytest.fixture
def k24():
    """K_{2,4} with left side {0, 1}."""
    return complete_bipartite(2, 4)


@pytest.fixture
def square():
    """The 4-cycle 0-1-2-3."""
    return cycle_graph(4)


@pytest.fixture
def paw():
    """Triangle 0-1-2 with the pendant edge 2-3."""
    return Graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])


@pytest.fixture
def edgeless():
    return Graph(5)


@pytest.fixture
def star5():
    """K_{1,5} with center 0."""
    return star_graph(5)


@pytest.fixture
def rng():
    """Seeded generator for tests that need randomness."""
    return make_rng(20240917)


@pytest.fixture
def pattern_shapes():
    """Hand-checked census counts on tiny graphs."""
    data = json.loads((FIXTURES / "pattern_shapes.json").read_text())
    return {
        name: (Graph.from_dict(entry["graph"]), entry["counts"])
        for name, entry in data["graphs"].items()
    }


@pytest.fixture
def test_config(tmp_path):
    """Configuration built without any pyproject table or WML_* variables."""
    env = {k: v for k, v in os.environ.items() if not k.startswith("WML_")}
    with patch.dict(os.environ, env, clear=True):
        return Config(tmp_path)


@pytest.fixture
def clean_environment():
    """Drop every WML_* variable for the duration of a test."""
    env = {k: v for k, v in os.environ.items() if not k.startswith("WML_")}
    with patch.dict(os.environ, env, clear=True):
        yield env


def pytest_configure(config):
    """Configure pytest markers."""
    config.addinivalue_line(
        "markers", "unit: marks tests as unit tests (deselect with '-m \"not unit\"')"
    )
    config.addinivalue_line(
        "markers",
        "integration: marks tests as integration tests (deselect with '-m \"not integration\"')",
    )
    config.addinivalue_line(
        "markers", "slow: marks Monte Carlo tests as slow (deselect with '-m \"not slow\"')"
    )
