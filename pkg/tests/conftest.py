import json
from pathlib import Path

import pytest

from collective_qubit.geometry import FIG3_TRAP, FIG6_TRAP
from collective_qubit.readout import DetectionConfig

FROZEN_PATH = Path(__file__).parent / "oracles" / "frozen.json"


@pytest.fixture(scope="session")
def frozen():
    """Reference values produced by tests/oracles/generate.py."""
    return json.loads(FROZEN_PATH.read_text())


@pytest.fixture
def fig3_trap():
    return FIG3_TRAP


@pytest.fixture
def fig6_trap():
    return FIG6_TRAP


@pytest.fixture
def detection():
    return DetectionConfig()
