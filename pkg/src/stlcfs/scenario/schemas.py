"""
Schemas for delivery scenarios.

A scenario is the full problem instance: horizon and kinematic limits, the
goals with their delivery windows, the box obstacles, the cost weights and the
algorithm parameters. Time indices are 1-based step numbers in [1, T]
everywhere in this package; array row t-1 holds step t.

Models only check types and vector shapes. Semantic invariants are reported by
`stlcfs.scenario.loader.validate` so that invalid instances can still be built
and inspected.
"""

from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, Field, StrictInt, conlist

from stlcfs.core.config import settings

Vec3 = conlist(float, min_items=3, max_items=3)


class Goal(BaseModel):
    """A delivery target that must be reached within its time window."""
    center: Vec3
    window: Tuple[StrictInt, StrictInt]  # 1-based steps; 4.7 is rejected, not truncated
    epsilon: float
    priority: float = 1.0  # scales this goal's robustness in the STL cost

    @property
    def tau_start(self) -> int:
        return self.window[0]

    @property
    def tau_end(self) -> int:
        return self.window[1]

    @property
    def length(self) -> int:
        """Number of steps in the window (inclusive)."""
        return self.window[1] - self.window[0] + 1

    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    class Config:
        allow_mutation = False


class BoxObstacle(BaseModel):
    """Axis-aligned box [lower, upper] in meters."""
    lower: Vec3
    upper: Vec3

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    class Config:
        allow_mutation = False


class Weights(BaseModel):
    w1: float = 10.0
    w2: float = 0.1
    w3: float = 1.0
    d_safe: float = 0.5

    class Config:
        allow_mutation = False


class AlgorithmParams(BaseModel):
    alpha: float = 0.1
    max_outer_iters: int = 20
    step_tol: float = 1e-3
    cost_rel_tol: float = 1e-3
    solver_tol: float = 1e-6
    solver_max_iters: int = Field(default_factory=lambda: settings.solver_max_iters)
    cfs_margin: float = 0.01
    limit_shrink: float = 1e-3
    elastic_weight: float = 1e3
    repair_reference: bool = True

    class Config:
        allow_mutation = False


class Scenario(BaseModel):
    """
    Immutable problem instance. Field names follow the JSON file; the horizon
    is stored under the JSON key "T".
    """
    horizon_steps: int = Field(..., alias="T")
    dt: float
    x_init: Vec3
    v_init: Vec3 = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    v_max: float
    a_max: float
    goals: List[Goal] = Field(default_factory=list)
    obstacles: List[BoxObstacle] = Field(default_factory=list)
    weights: Weights = Field(default_factory=Weights)
    params: AlgorithmParams = Field(default_factory=AlgorithmParams)

    @property
    def T(self) -> int:
        return self.horizon_steps

    @property
    def K(self) -> int:
        return len(self.goals)

    @property
    def M(self) -> int:
        return len(self.obstacles)

    def x_init_array(self) -> np.ndarray:
        return np.asarray(self.x_init, dtype=float)

    def v_init_array(self) -> np.ndarray:
        return np.asarray(self.v_init, dtype=float)

    class Config:
        allow_mutation = False
        allow_population_by_field_name = True


class Violation(BaseModel):
    """One violated scenario invariant."""
    code: str
    field: str
    message: str
