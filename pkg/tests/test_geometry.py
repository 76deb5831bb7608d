"""
Tests for box signed distance, its gradient and the tangent half-spaces.
"""

import numpy as np
import pytest

from stlcfs.dynamics.model import Trajectory
from stlcfs.geometry.sdf import (
    linearize_obstacles,
    linearize_point,
    min_clearance,
    sd_gradient,
    signed_distance,
)
from stlcfs.scenario.schemas import BoxObstacle

pytestmark = pytest.mark.unit

O1 = BoxObstacle(lower=[10, 5, 0], upper=[15, 15, 15])
CUBE = BoxObstacle(lower=[0, 0, 0], upper=[2, 2, 2])


def random_box(rng):
    lower = rng.uniform(-5, 5, size=3)
    return BoxObstacle(lower=lower.tolist(), upper=(lower + rng.uniform(0.5, 4, size=3)).tolist())


def test_boundary_point_has_zero_distance():
    d = signed_distance([10, 5, 5], O1)
    assert d == 0.0
    assert np.copysign(1.0, d) == 1.0


def test_outside_distance():
    assert signed_distance([0, 0, 5], O1) == pytest.approx(np.sqrt(125), abs=1e-12)
    assert signed_distance([0, 0, 5], O1) == pytest.approx(11.180340, abs=1e-6)


def test_outside_distance_matches_surface_sampling():
    """Dense sampling of the box surface gives the same minimum distance."""
    p = np.array([0.0, 0.0, 5.0])
    # 61 nodes put the z = 5 level on the grid
    grid = np.linspace(0, 1, 61)
    lower, upper = O1.bounds()
    best = np.inf
    for axis in range(3):
        others = [a for a in range(3) if a != axis]
        u, w = np.meshgrid(grid, grid)
        for face in (lower[axis], upper[axis]):
            pts = np.zeros((u.size, 3))
            pts[:, axis] = face
            pts[:, others[0]] = lower[others[0]] + u.ravel() * (upper[others[0]] - lower[others[0]])
            pts[:, others[1]] = lower[others[1]] + w.ravel() * (upper[others[1]] - lower[others[1]])
            best = min(best, float(np.min(np.linalg.norm(pts - p, axis=1))))
    assert signed_distance(p, O1) == pytest.approx(best, abs=1e-9)


def test_center_depth():
    assert signed_distance([12.5, 10, 7.5], O1) == pytest.approx(-2.5)


def test_gradient_outside_points_from_closest_point():
    g = sd_gradient([0, 0, 5], O1)
    np.testing.assert_allclose(g, np.array([-10, -5, 0]) / np.sqrt(125), atol=1e-12)


def test_gradient_inside_uses_nearest_face():
    np.testing.assert_array_equal(sd_gradient([12.4, 10, 7.5], O1), [-1, 0, 0])
    np.testing.assert_array_equal(sd_gradient([14.0, 10, 7.5], O1), [1, 0, 0])
    np.testing.assert_array_equal(sd_gradient([12.5, 10, 14.5], O1), [0, 0, 1])


def test_gradient_tie_break_prefers_x_then_negative_side():
    np.testing.assert_array_equal(sd_gradient([12.5, 7.5, 7.5], O1), [-1, 0, 0])
    np.testing.assert_array_equal(sd_gradient([1, 1, 1], CUBE), [-1, 0, 0])
    np.testing.assert_array_equal(sd_gradient([1.5, 1, 1.5], CUBE), [1, 0, 0])
    np.testing.assert_array_equal(sd_gradient([1, 1.5, 1.5], CUBE), [0, 1, 0])


def test_gradient_is_unit_everywhere():
    rng = np.random.default_rng(3)
    for _ in range(500):
        box = random_box(rng)
        p = rng.uniform(-10, 10, size=3)
        assert np.linalg.norm(sd_gradient(p, box)) == pytest.approx(1.0, abs=1e-9)


def test_gradient_matches_finite_differences_outside():
    rng = np.random.default_rng(11)
    h = 1e-6
    checked = 0
    while checked < 200:
        box = random_box(rng)
        p = rng.uniform(-10, 10, size=3)
        if signed_distance(p, box) < 0.1:
            continue
        fd = np.array([
            (signed_distance(p + h * e, box) - signed_distance(p - h * e, box)) / (2 * h)
            for e in np.eye(3)
        ])
        np.testing.assert_allclose(sd_gradient(p, box), fd, atol=1e-5)
        checked += 1


def test_linearization_is_exact_at_reference():
    lc = linearize_point([0, 0, 5], O1)
    assert lc.value([0, 0, 5]) == pytest.approx(np.sqrt(125), abs=1e-12)


def test_boundary_reference_gives_tangent_plane():
    lc = linearize_point([10, 8, 5], O1)
    np.testing.assert_array_equal(lc.g, [-1, 0, 0])
    assert lc.c == pytest.approx(10.0)
    assert lc.value([10, 100, -3]) == pytest.approx(0.0)


def test_linearize_obstacles_covers_every_obstacle_and_step():
    x = np.column_stack([np.linspace(0, 20, 6), np.zeros(6), np.full(6, 5.0)])
    traj = Trajectory.from_positions(x, 1.0)
    boxes = [O1, CUBE]
    constraints = linearize_obstacles(traj, boxes)
    assert len(constraints) == 12
    assert [(lc.m, lc.t) for lc in constraints[:2]] == [(0, 1), (0, 2)]
    assert (constraints[6].m, constraints[6].t) == (1, 1)
    for lc in constraints:
        p = x[lc.t - 1]
        assert lc.value(p) == pytest.approx(signed_distance(p, boxes[lc.m]), abs=1e-12)
        assert np.linalg.norm(lc.g) == pytest.approx(1.0, abs=1e-9)


def test_linearization_under_estimates_and_is_sound():
    """Tangent planes never exceed the true signed distance."""
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        box = random_box(rng)
        ref = rng.uniform(-10, 10, size=3)
        query = rng.uniform(-10, 10, size=3)
        lc = linearize_point(ref, box)
        exact = signed_distance(query, box)
        approx = lc.value(query)
        assert approx <= exact + 1e-9
        if approx >= 0:
            assert exact >= -1e-9


def test_min_clearance_without_obstacles_is_infinite():
    assert min_clearance([0, 0, 0], []) == float("inf")
    assert min_clearance([0, 0, 5], [O1, CUBE]) == pytest.approx(signed_distance([0, 0, 5], CUBE))
