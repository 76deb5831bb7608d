from stlcfs.geometry.sdf import (
    LinearizedObstacleConstraint,
    linearize_obstacles,
    linearize_point,
    min_clearance,
    sd_gradient,
    signed_distance,
)

__all__ = [
    "LinearizedObstacleConstraint",
    "linearize_obstacles",
    "linearize_point",
    "min_clearance",
    "sd_gradient",
    "signed_distance",
]
