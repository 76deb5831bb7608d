from stlcfs.planner.schemas import IterationRecord, PlanStatus
from stlcfs.planner.manager import (
    PlanManager,
    PlanResult,
    anchor_step,
    finalize_trajectory,
    initial_reference,
    plan,
    repair_reference,
    update_references,
)

__all__ = [
    "IterationRecord",
    "PlanManager",
    "PlanResult",
    "PlanStatus",
    "anchor_step",
    "finalize_trajectory",
    "initial_reference",
    "plan",
    "repair_reference",
    "update_references",
]
