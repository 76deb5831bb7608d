"""
Shared fixtures: the bundled scenario and small hand-made instances.
"""

import copy
import json
from pathlib import Path
from typing import Any, Dict

import pytest

from stlcfs.scenario.loader import load_scenario
from stlcfs.scenario.schemas import Scenario

ROOT = Path(__file__).resolve().parent.parent
URBAN_SCENARIO = ROOT / "scenarios" / "paper_urban.json"

O1_CENTER = [12.5, 10.0, 7.5]

SIMPLE_SCENARIO: Dict[str, Any] = {
    "T": 12,
    "dt": 1.0,
    "x_init": [0.0, 0.0, 5.0],
    "v_max": 5.0,
    "a_max": 2.0,
    "goals": [{"center": [10.0, 4.0, 5.0], "window": [6, 12], "epsilon": 0.2}],
    "obstacles": [],
}


def scenario_dict(**changes: Any) -> Dict[str, Any]:
    """A copy of SIMPLE_SCENARIO with top-level keys replaced."""
    data = copy.deepcopy(SIMPLE_SCENARIO)
    data.update(copy.deepcopy(changes))
    return data


def make_scenario(**changes: Any) -> Scenario:
    """Parse without validation, so deliberately invalid instances can be built."""
    return Scenario.parse_obj(scenario_dict(**changes))


@pytest.fixture
def urban_path() -> Path:
    return URBAN_SCENARIO


@pytest.fixture
def urban_dict() -> Dict[str, Any]:
    with open(URBAN_SCENARIO, "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def urban_scenario() -> Scenario:
    return load_scenario(URBAN_SCENARIO)


@pytest.fixture
def simple_scenario() -> Scenario:
    """One reachable goal, no obstacles, T=12."""
    return make_scenario()


@pytest.fixture
def simple_path(tmp_path) -> Path:
    path = tmp_path / "simple.json"
    path.write_text(json.dumps(SIMPLE_SCENARIO), encoding="utf-8")
    return path
