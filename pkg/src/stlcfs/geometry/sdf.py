"""
Signed distance to axis-aligned boxes and its first-order linearization.

Signed distance is convex in p (distance to a convex set outside, minus the
depth inside), so the tangent plane at any reference point under-estimates
it everywhere. Requiring the tangent plane to be nonnegative keeps a point out
of the box interior: these half-spaces form the convex feasible set around
the reference.
"""

import logging
from typing import List, Sequence

import numpy as np

from stlcfs.scenario.schemas import BoxObstacle

logger = logging.getLogger(__name__)

# Face order used for interior/boundary gradients. np.argmin returns the first
# minimum, which gives the x, y, z order with the negative side first.
_FACE_NORMALS = np.array(
    [
        [-1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0],
    ]
)


def _face_distances(p: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Distances from p to the six face planes, in _FACE_NORMALS order."""
    below = p - lower
    above = upper - p
    return np.array([below[0], above[0], below[1], above[1], below[2], above[2]])


def signed_distance(p: np.ndarray, box: BoxObstacle) -> float:
    """
    Euclidean distance to the box outside, 0 on the boundary, minus the
    distance to the nearest face inside.
    """
    p = np.asarray(p, dtype=float)
    lower, upper = box.bounds()
    outside = np.maximum(np.maximum(lower - p, p - upper), 0.0)
    if np.any(outside > 0.0):
        return float(np.linalg.norm(outside))
    depth = float(np.min(_face_distances(p, lower, upper)))
    return -depth if depth > 0.0 else 0.0


def sd_gradient(p: np.ndarray, box: BoxObstacle) -> np.ndarray:
    """
    Unit (sub)gradient of signed_distance at p.

    Outside the box this is the direction from the closest box point to p.
    Inside or on the boundary it is the outward normal of the nearest face,
    ties resolved x before y before z, negative side first.
    """
    p = np.asarray(p, dtype=float)
    lower, upper = box.bounds()
    closest = np.clip(p, lower, upper)
    diff = p - closest
    norm = float(np.linalg.norm(diff))
    if norm > 0.0:
        return diff / norm
    face = int(np.argmin(_face_distances(p, lower, upper)))
    return _FACE_NORMALS[face].copy()


class LinearizedObstacleConstraint:
    """
    Half-space g·x + c ≥ 0 for obstacle m at step t (both 1-based for t, 0-based for m).
    """

    def __init__(self, m: int, t: int, g: np.ndarray, c: float):
        self.m = m
        self.t = t
        self.g = np.asarray(g, dtype=float)
        self.c = float(c)

    def value(self, x: np.ndarray) -> float:
        return float(self.g @ np.asarray(x, dtype=float) + self.c)

    def __repr__(self) -> str:
        return f"LinearizedObstacleConstraint(m={self.m}, t={self.t}, g={self.g.tolist()}, c={self.c:.6g})"


def linearize_point(p: np.ndarray, box: BoxObstacle, m: int = 0, t: int = 1) -> LinearizedObstacleConstraint:
    p = np.asarray(p, dtype=float)
    g = sd_gradient(p, box)
    c = signed_distance(p, box) - float(g @ p)
    return LinearizedObstacleConstraint(m, t, g, c)


def linearize_obstacles(reference, obstacles: Sequence[BoxObstacle]) -> List[LinearizedObstacleConstraint]:
    """
    Tangent half-spaces of every obstacle at every reference position,
    obstacle-major: entry m·T + (t−1) belongs to (m, t).

    Args:
        reference: Trajectory (or any object with an x array of shape (T, 3))
        obstacles: boxes in scenario order

    Returns:
        M·T LinearizedObstacleConstraint entries
    """
    positions = np.asarray(reference.x, dtype=float)
    T = positions.shape[0]
    constraints = [
        linearize_point(positions[t], box, m, t + 1)
        for m, box in enumerate(obstacles)
        for t in range(T)
    ]
    colliding = sum(1 for lc in constraints if lc.value(positions[lc.t - 1]) <= 0.0)
    if colliding:
        logger.debug(f"{colliding} reference samples lie inside or on an obstacle")
    return constraints


def min_clearance(p: np.ndarray, obstacles: Sequence[BoxObstacle]) -> float:
    """Smallest signed distance from p to any obstacle; +inf without obstacles."""
    if not obstacles:
        return float("inf")
    return min(signed_distance(p, box) for box in obstacles)
