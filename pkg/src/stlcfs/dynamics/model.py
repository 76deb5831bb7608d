"""
Discrete-time double integrator (Euler):

    x[t+1] = x[t] + v[t]·dt
    v[t+1] = v[t] + a[t]·dt        t = 1 … T−1

Motion variables are stacked as z = (x, v, a) with x and v of length 3T and a
of length 3(T−1); step t, axis j of x sits at column 3(t−1)+j.
"""

import logging
from typing import List

import numpy as np
import scipy.sparse as sp

from stlcfs.core.errors import DimensionMismatchError
from stlcfs.scenario.schemas import Scenario
from stlcfs.solver.schemas import ConeKind, ConstraintBlock

logger = logging.getLogger(__name__)


class Trajectory:
    """Positions (T×3), velocities (T×3) and accelerations ((T−1)×3)."""

    def __init__(self, x: np.ndarray, v: np.ndarray, a: np.ndarray):
        self.x = np.asarray(x, dtype=float).reshape(-1, 3)
        self.v = np.asarray(v, dtype=float).reshape(-1, 3)
        self.a = np.asarray(a, dtype=float).reshape(-1, 3)
        T = self.x.shape[0]
        if self.v.shape[0] != T or self.a.shape[0] != T - 1:
            raise DimensionMismatchError(
                f"Trajectory arrays disagree: x has {T} rows, v {self.v.shape[0]}, a {self.a.shape[0]} (expected {T - 1})"
            )

    @property
    def T(self) -> int:
        return self.x.shape[0]

    def position(self, t: int) -> np.ndarray:
        """Position at 1-based step t."""
        return self.x[t - 1]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x.ravel(), self.v.ravel(), self.a.ravel()])

    @classmethod
    def from_vector(cls, z: np.ndarray, T: int) -> "Trajectory":
        z = np.asarray(z, dtype=float)
        if z.shape[0] < motion_dim(T):
            raise DimensionMismatchError(f"vector of length {z.shape[0]} is too short for T={T}")
        x = z[: 3 * T].reshape(T, 3)
        v = z[3 * T: 6 * T].reshape(T, 3)
        a = z[6 * T: motion_dim(T)].reshape(T - 1, 3)
        return cls(x.copy(), v.copy(), a.copy())

    @classmethod
    def from_positions(cls, x: np.ndarray, dt: float) -> "Trajectory":
        """
        Velocities and accelerations by forward differences; the last
        velocity repeats the one before it.
        """
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        T = x.shape[0]
        v = np.zeros_like(x)
        if T > 1:
            v[:-1] = np.diff(x, axis=0) / dt
            v[-1] = v[-2]
        a = np.diff(v, axis=0) / dt
        return cls(x, v, a)

    def copy(self) -> "Trajectory":
        return Trajectory(self.x.copy(), self.v.copy(), self.a.copy())

    def __repr__(self) -> str:
        return f"Trajectory(T={self.T}, start={self.x[0].tolist()}, end={self.x[-1].tolist()})"


def motion_dim(T: int) -> int:
    """Number of stacked (x, v, a) variables for horizon T."""
    return 6 * T + 3 * (T - 1)


def propagate(x_init: np.ndarray, v_init: np.ndarray, accels: np.ndarray, dt: float) -> Trajectory:
    """
    Forward Euler recursion from (x_init, v_init) under the given accelerations.
    The horizon is len(accels) + 1.
    """
    accels = np.asarray(accels, dtype=float).reshape(-1, 3)
    T = accels.shape[0] + 1
    x = np.zeros((T, 3))
    v = np.zeros((T, 3))
    x[0] = np.asarray(x_init, dtype=float)
    v[0] = np.asarray(v_init, dtype=float)
    for t in range(T - 1):
        x[t + 1] = x[t] + v[t] * dt
        v[t + 1] = v[t] + accels[t] * dt
    return Trajectory(x, v, accels.copy())


def dynamics_constraints(s: Scenario) -> ConstraintBlock:
    """
    Equality rows over the motion columns: for each step 3 position rows then
    3 velocity rows, followed by 3 rows fixing x[1] and 3 rows fixing v[1].
    """
    T, dt = s.T, s.dt
    n = motion_dim(T)
    v_off, a_off = 3 * T, 6 * T
    rows: List[int] = []
    cols: List[int] = []
    vals: List[float] = []
    b = np.zeros(6 * (T - 1) + 6)

    r = 0
    for t in range(T - 1):
        for j in range(3):
            # x[t+1] - x[t] - dt·v[t] = 0
            rows += [r, r, r]
            cols += [3 * (t + 1) + j, 3 * t + j, v_off + 3 * t + j]
            vals += [1.0, -1.0, -dt]
            r += 1
        for j in range(3):
            # v[t+1] - v[t] - dt·a[t] = 0
            rows += [r, r, r]
            cols += [v_off + 3 * (t + 1) + j, v_off + 3 * t + j, a_off + 3 * t + j]
            vals += [1.0, -1.0, -dt]
            r += 1

    x_init, v_init = s.x_init_array(), s.v_init_array()
    for j in range(3):
        rows.append(r)
        cols.append(j)
        vals.append(1.0)
        b[r] = x_init[j]
        r += 1
    for j in range(3):
        rows.append(r)
        cols.append(v_off + j)
        vals.append(1.0)
        b[r] = v_init[j]
        r += 1

    A = sp.csr_matrix((vals, (rows, cols)), shape=(r, n))
    return ConstraintBlock(A, b, [(ConeKind.ZERO, r)], label="dynamics")


def limit_constraints(s: Scenario, shrink: float = 0.0) -> List[ConstraintBlock]:
    """
    Planar speed cones ‖(v_x, v_y)[t]‖ ≤ v_max for t = 1 … T and interval
    bounds |a_j[t]| ≤ a_max for t = 1 … T−1. Vertical speed is free.

    Args:
        s: scenario
        shrink: relative tightening; both limits are multiplied by (1 − shrink)

    Returns:
        [speed block (T cones of dimension 3), acceleration block (6(T−1) nonneg rows)]
    """
    T = s.T
    n = motion_dim(T)
    v_off, a_off = 3 * T, 6 * T
    v_max = s.v_max * (1.0 - shrink)
    a_max = s.a_max * (1.0 - shrink)

    # speed: s = (v_max, v_x, v_y) ∈ soc  via  A = (0, −e_vx, −e_vy), b = (v_max, 0, 0)
    rows, cols, vals = [], [], []
    b_speed = np.zeros(3 * T)
    for t in range(T):
        b_speed[3 * t] = v_max
        for j in range(2):
            rows.append(3 * t + 1 + j)
            cols.append(v_off + 3 * t + j)
            vals.append(-1.0)
    speed = ConstraintBlock(
        sp.csr_matrix((vals, (rows, cols)), shape=(3 * T, n)),
        b_speed,
        [(ConeKind.SOC, 3)] * T,
        label="planar_speed",
    )

    # acceleration: a ≤ a_max and −a ≤ a_max
    m = 3 * (T - 1)
    upper = sp.csr_matrix((np.ones(m), (np.arange(m), a_off + np.arange(m))), shape=(m, n))
    accel = ConstraintBlock(
        sp.vstack([upper, -upper], format="csr"),
        np.full(2 * m, a_max),
        [(ConeKind.NONNEG, 2 * m)],
        label="accel_bounds",
    )
    return [speed, accel]


def planar_speed(traj: Trajectory) -> np.ndarray:
    """‖(v_x, v_y)‖ per step."""
    return np.linalg.norm(traj.v[:, :2], axis=1)


def dynamics_residuals(traj: Trajectory, dt: float) -> np.ndarray:
    """
    Absolute Euler residuals, shape (T−1, 6): position axes then velocity axes.
    """
    rx = traj.x[1:] - traj.x[:-1] - dt * traj.v[:-1]
    rv = traj.v[1:] - traj.v[:-1] - dt * traj.a
    return np.abs(np.hstack([rx, rv]))
