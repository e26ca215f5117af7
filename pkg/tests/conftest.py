from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from cat0_engine.fields import load_scenario  # noqa: E402
from cat0_engine.models.euclidean import Euclidean  # noqa: E402
from cat0_engine.models.product import Product  # noqa: E402
from cat0_engine.models.tree import line_tree, tripod  # noqa: E402
from cat0_engine.scenario import read_document  # noqa: E402

SCENARIOS = ROOT / "scenarios"


def scenario_path(name: str) -> Path:
    return SCENARIOS / f"{name}.json"


def load(name: str):
    return load_scenario(read_document(scenario_path(name)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def plane():
    return Euclidean(2)


@pytest.fixture
def space3():
    return Euclidean(3)


@pytest.fixture
def tri():
    return tripod()


@pytest.fixture
def line():
    return line_tree()


@pytest.fixture
def plane_tripod():
    return Product(Euclidean(2), tripod())


@pytest.fixture
def line_tripod():
    return Product(line_tree(), tripod())
