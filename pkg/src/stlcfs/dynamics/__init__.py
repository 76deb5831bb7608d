from stlcfs.dynamics.model import (
    Trajectory,
    dynamics_constraints,
    dynamics_residuals,
    limit_constraints,
    motion_dim,
    planar_speed,
    propagate,
)

__all__ = [
    "Trajectory",
    "dynamics_constraints",
    "dynamics_residuals",
    "limit_constraints",
    "motion_dim",
    "planar_speed",
    "propagate",
]
