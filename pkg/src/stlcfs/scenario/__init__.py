from stlcfs.scenario.schemas import (
    AlgorithmParams,
    BoxObstacle,
    Goal,
    Scenario,
    Violation,
    Weights,
)
from stlcfs.scenario.loader import (
    apply_overrides,
    load_scenario,
    parse_scenario,
    read_scenario_dict,
    resolve_scenario_path,
    save_scenario,
    validate,
)

__all__ = [
    "AlgorithmParams",
    "BoxObstacle",
    "Goal",
    "Scenario",
    "Violation",
    "Weights",
    "apply_overrides",
    "load_scenario",
    "parse_scenario",
    "read_scenario_dict",
    "resolve_scenario_path",
    "save_scenario",
    "validate",
]
