"""
Reading, writing and validating scenario files.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

import numpy as np
from pydantic import ValidationError

from stlcfs.core.config import settings
from stlcfs.core.errors import ScenarioParseError, ScenarioValidationError
from stlcfs.scenario.schemas import Scenario, Violation

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def resolve_scenario_path(path: PathLike) -> Path:
    """
    A relative path that does not exist is looked up in the STL_CFS_SCENARIO_DIR
    directory, so bundled scenarios can be named by file name alone.
    """
    path = Path(path)
    if path.exists() or path.is_absolute():
        return path
    bundled = Path(settings.scenario_dir) / path
    if bundled.is_file():
        logger.debug(f"Resolved scenario {path} to {bundled}")
        return bundled
    return path


def read_scenario_dict(path: PathLike) -> Dict[str, Any]:
    """
    Read the raw JSON mapping of a scenario file.
    """
    path = resolve_scenario_path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise ScenarioParseError(f"Scenario file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"Malformed JSON in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ScenarioParseError(f"Scenario root must be a JSON object: {path}")
    return data


def parse_scenario(data: Mapping[str, Any]) -> Scenario:
    """
    Build a Scenario from a raw mapping and check every invariant.
    """
    try:
        scenario = Scenario.parse_obj(data)
    except ValidationError as e:
        raise ScenarioParseError(f"Scenario does not match schema: {e}") from e

    violations = validate(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    return scenario


def load_scenario(path: PathLike) -> Scenario:
    """
    Load and validate a scenario JSON file.
    """
    scenario = parse_scenario(read_scenario_dict(path))
    logger.info(
        f"Loaded scenario {path}: T={scenario.T}, K={scenario.K} goals, M={scenario.M} obstacles"
    )
    return scenario


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    return scenario.dict(by_alias=True)


def save_scenario(scenario: Scenario, path: PathLike) -> None:
    """
    Write a scenario as JSON. Floats are written with repr precision so a
    reload reproduces them bit-exactly.
    """
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)
        f.write("\n")


def _parse_override_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(data: Mapping[str, Any], overrides: List[str]) -> Dict[str, Any]:
    """
    Apply `dotted.path=value` overrides to a raw scenario mapping.

    Intermediate objects are created when missing (so `params.alpha=0.05`
    works on a file without a params block); integer path parts index lists.
    Returns a new mapping; the input is left untouched.
    """
    result = copy.deepcopy(dict(data))
    for item in overrides:
        if "=" not in item:
            raise ScenarioParseError(f"Override must look like key=value: '{item}'")
        key, raw = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise ScenarioParseError(f"Empty override key in '{item}'")

        node: Any = result
        for part in parts[:-1]:
            if isinstance(node, list):
                try:
                    node = node[int(part)]
                except (ValueError, IndexError) as e:
                    raise ScenarioParseError(f"Bad list index '{part}' in override '{item}'") from e
            else:
                node = node.setdefault(part, {})
                if not isinstance(node, (dict, list)):
                    raise ScenarioParseError(f"Override '{item}' descends into a scalar at '{part}'")

        last = parts[-1]
        value = _parse_override_value(raw)
        if isinstance(node, list):
            try:
                node[int(last)] = value
            except (ValueError, IndexError) as e:
                raise ScenarioParseError(f"Bad list index '{last}' in override '{item}'") from e
        else:
            node[last] = value
        logger.debug(f"Override {key} = {value!r}")
    return result


def _point_strictly_inside(point: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> bool:
    return bool(np.all(point > lower) and np.all(point < upper))


def validate(scenario: Scenario) -> List[Violation]:
    """
    Report every violated scenario invariant. Returns an empty list for a
    valid scenario; never raises.
    """
    violations: List[Violation] = []

    def add(code: str, field: str, message: str) -> None:
        violations.append(Violation(code=code, field=field, message=message))

    T = scenario.horizon_steps
    if T < 2:
        add("horizon_too_short", "T", f"horizon must have at least 2 steps, got {T}")
    if not scenario.dt > 0:
        add("nonpositive_dt", "dt", f"dt must be > 0, got {scenario.dt}")
    if not scenario.v_max > 0:
        add("nonpositive_v_max", "v_max", f"v_max must be > 0, got {scenario.v_max}")
    if not scenario.a_max > 0:
        add("nonpositive_a_max", "a_max", f"a_max must be > 0, got {scenario.a_max}")

    for k, goal in enumerate(scenario.goals):
        field = f"goals[{k}]"
        if not goal.epsilon > 0:
            add("nonpositive_epsilon", f"{field}.epsilon", f"epsilon must be > 0, got {goal.epsilon}")
        if goal.tau_start > goal.tau_end:
            add("window_inverted", f"{field}.window", f"window start {goal.tau_start} after end {goal.tau_end}")
        if goal.tau_start < 1 or goal.tau_end > T:
            add("window_out_of_range", f"{field}.window", f"window {list(goal.window)} outside [1, {T}]")
        if goal.priority < 0:
            add("negative_priority", f"{field}.priority", f"priority must be >= 0, got {goal.priority}")

    for m, box in enumerate(scenario.obstacles):
        lower, upper = box.bounds()
        if not np.all(lower < upper):
            add("degenerate_obstacle", f"obstacles[{m}]",
                f"degenerate obstacle: lower {box.lower} must be < upper {box.upper} on every axis")

    for k, goal in enumerate(scenario.goals):
        center = goal.center_array()
        for m, box in enumerate(scenario.obstacles):
            lower, upper = box.bounds()
            if _point_strictly_inside(center, lower, upper):
                add("goal_inside_obstacle", f"goals[{k}].center",
                    f"goal center {goal.center} lies inside obstacle {m}")

    w = scenario.weights
    for name in ("w1", "w2", "w3"):
        if getattr(w, name) < 0:
            add("negative_weight", f"weights.{name}", f"{name} must be >= 0, got {getattr(w, name)}")
    if not (w.w1 > 0 or w.w2 > 0 or w.w3 > 0):
        add("all_weights_zero", "weights", "at least one of w1, w2, w3 must be > 0")
    if w.d_safe < 0:
        add("negative_d_safe", "weights.d_safe", f"d_safe must be >= 0, got {w.d_safe}")

    p = scenario.params
    if not p.alpha > 0:
        add("nonpositive_alpha", "params.alpha", f"alpha must be > 0, got {p.alpha}")
    if p.max_outer_iters < 1:
        add("nonpositive_max_outer_iters", "params.max_outer_iters",
            f"max_outer_iters must be >= 1, got {p.max_outer_iters}")
    if p.step_tol < 0:
        add("negative_step_tol", "params.step_tol", f"step_tol must be >= 0, got {p.step_tol}")
    if p.cost_rel_tol < 0:
        add("negative_cost_rel_tol", "params.cost_rel_tol", f"cost_rel_tol must be >= 0, got {p.cost_rel_tol}")
    if not p.solver_tol > 0:
        add("nonpositive_solver_tol", "params.solver_tol", f"solver_tol must be > 0, got {p.solver_tol}")
    if p.solver_max_iters < 1:
        add("nonpositive_solver_max_iters", "params.solver_max_iters",
            f"solver_max_iters must be >= 1, got {p.solver_max_iters}")
    if p.cfs_margin < 0:
        add("negative_cfs_margin", "params.cfs_margin", f"cfs_margin must be >= 0, got {p.cfs_margin}")
    if not 0 <= p.limit_shrink < 1:
        add("limit_shrink_out_of_range", "params.limit_shrink",
            f"limit_shrink must be in [0, 1), got {p.limit_shrink}")
    if p.elastic_weight < 0:
        add("negative_elastic_weight", "params.elastic_weight",
            f"elastic_weight must be >= 0, got {p.elastic_weight}")

    return violations
