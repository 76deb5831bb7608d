"""
Exact-semantics verification of a trajectory.

Nothing here depends on the optimizer: only the scenario, the trajectory and
the closed-form signed distance and robustness definitions are used.
"""

import logging
from typing import List, Optional

import numpy as np

from stlcfs.core.config import settings
from stlcfs.dynamics.model import Trajectory, dynamics_residuals, planar_speed
from stlcfs.geometry.sdf import signed_distance
from stlcfs.scenario.schemas import Scenario
from stlcfs.stl.robustness import rho_window
from stlcfs.verify.schemas import CheckResult, VerificationReport

logger = logging.getLogger(__name__)

INF = float("inf")


def _result(name: str, margin: float, tol: float, unit: str, location=None, hard: bool = True,
            message: Optional[str] = None) -> CheckResult:
    passed = margin >= -tol if hard else margin >= 0.0
    return CheckResult(
        name=name, passed=passed, margin=margin, unit=unit,
        location=location or {}, hard=hard, message=message,
    )


def _check_dynamics(s: Scenario, traj: Trajectory, tol: float) -> CheckResult:
    res = dynamics_residuals(traj, s.dt)
    if res.size == 0:
        return _result("dynamics", 0.0, tol, "m")
    t, _ = np.unravel_index(int(np.argmax(res)), res.shape)
    return _result("dynamics", -float(res.max()), tol, "m", {"t": int(t) + 1})


def _check_initial(s: Scenario, traj: Trajectory, tol: float) -> CheckResult:
    dx = float(np.max(np.abs(traj.x[0] - s.x_init_array())))
    dv = float(np.max(np.abs(traj.v[0] - s.v_init_array())))
    return _result("initial_conditions", -max(dx, dv), tol, "m", {"t": 1})


def _check_speed(s: Scenario, traj: Trajectory, tol: float) -> CheckResult:
    speed = planar_speed(traj)
    t = int(np.argmax(speed))
    return _result("planar_speed", float(s.v_max - speed[t]), tol, "m/s", {"t": t + 1})


def _check_acceleration(s: Scenario, traj: Trajectory, tol: float) -> CheckResult:
    mag = np.abs(traj.a)
    if mag.size == 0:
        return _result("acceleration", float(s.a_max), tol, "m/s^2")
    t, axis = np.unravel_index(int(np.argmax(mag)), mag.shape)
    return _result(
        "acceleration", float(s.a_max - mag[t, axis]), tol, "m/s^2", {"t": int(t) + 1, "axis": int(axis)}
    )


def _clearances(s: Scenario, traj: Trajectory) -> np.ndarray:
    """signed_distance for every (m, t), shape (M, T)."""
    return np.array([[signed_distance(x_t, box) for x_t in traj.x] for box in s.obstacles]).reshape(s.M, traj.T)


def _check_collision(s: Scenario, clear: np.ndarray, tol: float) -> CheckResult:
    if clear.size == 0:
        return _result("collision", INF, tol, "m")
    m, t = np.unravel_index(int(np.argmin(clear)), clear.shape)
    return _result("collision", float(clear[m, t]), tol, "m", {"m": int(m), "t": int(t) + 1})


def _check_stl(s: Scenario, traj: Trajectory, tol: float) -> CheckResult:
    if not s.goals:
        return _result("stl", INF, tol, "m")
    best = [rho_window(traj, goal) for goal in s.goals]
    values = [float(np.max(r)) for r in best]
    k = int(np.argmin(values))
    t = s.goals[k].tau_start + int(np.argmax(best[k]))
    return _result("stl", values[k], tol, "m", {"k": k, "t": t})


def _check_inter_sample(s: Scenario, traj: Trajectory, clear: np.ndarray) -> CheckResult:
    """
    A segment is at risk when the smaller endpoint clearance is below half its
    length: the straight chord may then clip the box between samples.
    """
    if clear.size == 0 or traj.T < 2:
        return _result("inter_sample_risk", INF, 0.0, "m", hard=False)
    half = 0.5 * np.linalg.norm(np.diff(traj.x, axis=0), axis=1)
    risk = np.minimum(clear[:, :-1], clear[:, 1:]) - half[None, :]
    m, t = np.unravel_index(int(np.argmin(risk)), risk.shape)
    flagged = int(np.sum(risk < 0.0))
    message = f"{flagged} segment(s) may cut an obstacle corner" if flagged else None
    return _result(
        "inter_sample_risk", float(risk[m, t]), 0.0, "m", {"m": int(m), "t": int(t) + 1},
        hard=False, message=message,
    )


def verify(s: Scenario, traj: Trajectory, tol: Optional[float] = None) -> VerificationReport:
    """
    Check a trajectory against dynamics, initial state, planar speed,
    acceleration, collision at every step and the goal windows.

    Args:
        s: scenario
        traj: trajectory covering the horizon
        tol: absolute tolerance; defaults to the STL_CFS_VERIFY_TOL setting

    Returns:
        VerificationReport; `passed` is true iff every hard check passes
    """
    tol = settings.verify_tol if tol is None else tol
    clear = _clearances(s, traj)
    checks: List[CheckResult] = [
        _check_dynamics(s, traj, tol),
        _check_initial(s, traj, tol),
        _check_speed(s, traj, tol),
        _check_acceleration(s, traj, tol),
        _check_collision(s, clear, tol),
        _check_stl(s, traj, tol),
        _check_inter_sample(s, traj, clear),
    ]
    passed = all(c.passed for c in checks if c.hard)
    for c in checks:
        if c.hard and not c.passed:
            logger.info(f"Verification failed: {c.name} margin {c.margin:.3g} {c.unit} at {c.location}")
    return VerificationReport(checks=checks, passed=passed, tol=tol)


def stl_margin_trace(s: Scenario, traj: Trajectory) -> List[np.ndarray]:
    """Running maximum of the goal robustness over each window, one array per goal."""
    return [np.maximum.accumulate(rho_window(traj, goal)) for goal in s.goals]
