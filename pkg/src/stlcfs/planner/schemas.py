"""
Schemas for planner output.
"""

from enum import Enum

from pydantic import BaseModel


class PlanStatus(str, Enum):
    CONVERGED = "converged"
    UNVERIFIED = "unverified"
    MAX_ITERS = "max_iters"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


class IterationRecord(BaseModel):
    """One outer iteration, as written to iterations.csv."""
    iteration: int
    exact_obj: float
    surrogate_obj: float
    step: float  # ‖x_new − x_ref‖∞ in meters
    solver_status: str
    solve_time: float
    solver_iters: int = 0
    elastic: bool = False
    verified: bool = False

    class Config:
        allow_mutation = False
