"""
Outer sequential-convex loop: linearize at a reference, solve the convex
subproblem, adopt the solution as the next reference, stop when both the
exact objective and the trajectory stop moving.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from stlcfs.assembly.builder import Subproblem, build_subproblem, objective_value_exact
from stlcfs.assembly.layout import VariableLayout
from stlcfs.core.settings import REPAIR_MIN_CLEARANCE
from stlcfs.dynamics.model import Trajectory, propagate
from stlcfs.geometry.sdf import signed_distance
from stlcfs.planner.schemas import IterationRecord, PlanStatus
from stlcfs.scenario.schemas import Scenario
from stlcfs.solver.admm import solve
from stlcfs.solver.schemas import SolveResult, SolveStatus
from stlcfs.stl.robustness import RobustnessTrace, rho_window
from stlcfs.verify.checks import verify
from stlcfs.verify.schemas import VerificationReport

logger = logging.getLogger(__name__)

# Objective increases smaller than this are not reported as non-monotone
MONOTONE_SLACK = 1e-6


class PlanResult:
    """Returned trajectory, its robustness trace and verification, plus the iteration log."""

    def __init__(
        self,
        status: PlanStatus,
        trajectory: Trajectory,
        trace: RobustnessTrace,
        records: List[IterationRecord],
        report: VerificationReport,
        best_iteration: Optional[int] = None,
    ):
        self.status = status
        self.trajectory = trajectory
        self.trace = trace
        self.records = records
        self.report = report
        self.best_iteration = best_iteration

    @property
    def verified(self) -> bool:
        return self.report.passed

    def __repr__(self) -> str:
        return (
            f"PlanResult(status={self.status.value}, iterations={len(self.records)}, "
            f"best={self.best_iteration}, verified={self.verified})"
        )


class _Iterate:
    def __init__(self, iteration: int, trajectory: Trajectory, mu: List[np.ndarray], objective: float,
                 report: VerificationReport):
        self.iteration = iteration
        self.trajectory = trajectory
        self.mu = mu
        self.objective = objective
        self.report = report


def anchor_step(window: Tuple[int, int]) -> int:
    """Window midpoint, halves rounded up."""
    return int(math.floor((window[0] + window[1]) / 2.0 + 0.5))


class PlanManager:
    """
    Reference construction and the outer planning loop.
    """

    @staticmethod
    def initial_reference(s: Scenario) -> Trajectory:
        """
        Straight segments from x_init through each goal center, placed at the
        midpoint step of the goal's window, then constant after the last goal.

        Args:
            s: scenario

        Returns:
            Trajectory with finite-difference velocities and accelerations
        """
        steps = [1]
        points = [s.x_init_array()]
        for k, goal in enumerate(s.goals):
            step = anchor_step(goal.window)
            if step <= steps[-1]:
                logger.debug(f"Goal {k} anchor step {step} not after step {steps[-1]}; skipped")
                continue
            steps.append(step)
            points.append(goal.center_array())

        t_grid = np.arange(1, s.T + 1, dtype=float)
        points = np.asarray(points)
        x = np.column_stack([np.interp(t_grid, steps, points[:, j]) for j in range(3)])
        return Trajectory.from_positions(x, s.dt)

    @staticmethod
    def repair_reference(s: Scenario, reference: Trajectory) -> Trajectory:
        """
        Push reference samples that lie inside or on an obstacle out through
        one lateral face of that obstacle.

        Each maximal run of colliding samples is moved together, along the
        face axis only. Faces on the dominant axis of travel and the bottom
        face are never used; among the rest the smallest total displacement
        wins (ties: x, y, z, negative side first). Step 1 is never moved.

        Args:
            s: scenario
            reference: reference trajectory, typically from initial_reference

        Returns:
            A new Trajectory with re-differenced velocities and accelerations
        """
        x = reference.x.copy()
        T = x.shape[0]
        clearance = max(s.weights.d_safe, REPAIR_MIN_CLEARANCE)
        moved = 0

        for _ in range(s.M + 1):
            changed = False
            for m, box in enumerate(s.obstacles):
                lower, upper = box.bounds()
                inside = [t > 0 and signed_distance(x[t], box) <= 0.0 for t in range(T)]
                for start, stop in _runs(inside):
                    before = x[start - 1]
                    after = x[stop] if stop < T else x[stop - 1]
                    travel = np.abs(after - before)
                    dominant = int(np.argmax(travel)) if np.any(travel > 0) else -1

                    best = None
                    for axis in range(3):
                        if axis == dominant:
                            continue
                        for side, target in ((-1, lower[axis] - clearance), (1, upper[axis] + clearance)):
                            if axis == 2 and side < 0:
                                continue
                            cost = float(np.sum(np.abs(x[start:stop, axis] - target)))
                            if best is None or cost < best[0]:
                                best = (cost, axis, target)
                    _, axis, target = best
                    x[start:stop, axis] = target
                    moved += stop - start
                    changed = True
                    logger.debug(
                        f"Repaired steps {start + 1}-{stop} out of obstacle {m} along axis {axis} to {target:.3f}"
                    )
            if not changed:
                break
        else:
            logger.warning("Reference repair did not clear every obstacle; continuing with partial repair")

        if moved:
            logger.info(f"Reference repair moved {moved} sample(s) out of obstacles")
        return Trajectory.from_positions(x, s.dt)

    @staticmethod
    def update_references(z: np.ndarray, layout: VariableLayout) -> Tuple[Trajectory, List[np.ndarray], List[np.ndarray]]:
        """
        Split a solution vector into the next linearization point.

        Args:
            z: solver primal
            layout: layout of the program that produced z

        Returns:
            (trajectory, ρ per goal window, μ per goal window)
        """
        traj = layout.trajectory(z)
        rho = [layout.rho(z, k) for k in range(layout.K)]
        mu = [layout.mu(z, k) for k in range(layout.K)]
        return traj, rho, mu

    @staticmethod
    def finalize_trajectory(s: Scenario, raw: Trajectory) -> Trajectory:
        """
        Clip accelerations to ±a_max and propagate from the initial state, so
        the reported trajectory is dynamically consistent by construction.
        """
        accels = np.clip(raw.a, -s.a_max, s.a_max)
        return propagate(s.x_init_array(), s.v_init_array(), accels, s.dt)

    @staticmethod
    def plan(s: Scenario) -> PlanResult:
        """
        Run the outer loop until converged or out of iterations.

        Args:
            s: validated scenario

        Returns:
            PlanResult holding the best verified iterate when there is one,
            otherwise the last iterate
        """
        p = s.params
        reference = PlanManager.initial_reference(s)
        if p.repair_reference and s.M:
            reference = PlanManager.repair_reference(s, reference)
        rho_ref = [rho_window(reference, goal) for goal in s.goals]
        mu_ref = [r.copy() for r in rho_ref]

        records: List[IterationRecord] = []
        best: Optional[_Iterate] = None
        last: Optional[_Iterate] = None
        prev_obj: Optional[float] = None
        warm: Optional[SolveResult] = None
        status: Optional[PlanStatus] = None

        for i in range(1, p.max_outer_iters + 1):
            sub, res, elastic, elapsed = PlanManager._solve_step(s, reference, rho_ref, mu_ref, warm)

            if not res.ok:
                status = PlanManager._failure_status(res.status, best is not None)
                records.append(IterationRecord(
                    iteration=i, exact_obj=float("nan"), surrogate_obj=float("nan"), step=float("nan"),
                    solver_status=res.status.value, solve_time=elapsed, solver_iters=res.iterations,
                    elastic=elastic,
                ))
                logger.warning(f"Iteration {i}: subproblem {res.status.value}; aborting")
                break

            raw, rho_new, mu_new = PlanManager.update_references(res.z, sub.layout)
            traj = PlanManager.finalize_trajectory(s, raw)
            obj = objective_value_exact(s, traj)
            step = float(np.max(np.abs(raw.x - reference.x)))
            report = verify(s, traj)

            record = IterationRecord(
                iteration=i, exact_obj=obj, surrogate_obj=res.objective, step=step,
                solver_status=res.status.value, solve_time=elapsed, solver_iters=res.iterations,
                elastic=elastic, verified=report.passed,
            )
            records.append(record)
            logger.info(
                f"Iteration {i}: J={obj:.6f} surrogate={res.objective:.6f} step={step:.3e} "
                f"status={res.status.value} time={elapsed:.3f}s"
                + (" elastic" if elastic else "")
                + ("" if report.passed else " unverified")
            )

            last = _Iterate(i, traj, mu_new, obj, report)
            if report.passed and (best is None or obj < best.objective):
                best = last

            if prev_obj is not None and i > 2 and obj > prev_obj + MONOTONE_SLACK:
                logger.warning(f"Iteration {i}: exact objective rose from {prev_obj:.6f} to {obj:.6f}")

            converged = False
            if prev_obj is not None:
                rel = abs(obj - prev_obj) / max(abs(prev_obj), 1.0)
                converged = rel < p.cost_rel_tol and step < p.step_tol

            reference, rho_ref, mu_ref = raw, rho_new, mu_new
            warm = res
            prev_obj = obj
            if converged:
                status = PlanStatus.CONVERGED if best is not None else PlanStatus.UNVERIFIED
                logger.info(f"Converged after {i} iterations")
                break

        if status is None:
            status = PlanStatus.MAX_ITERS if best is not None else PlanStatus.UNVERIFIED
            logger.warning(f"Stopped at the iteration cap ({p.max_outer_iters}) without converging")

        chosen = best if best is not None else last
        if chosen is None:
            # the very first subproblem failed: report the reference itself
            traj = PlanManager.finalize_trajectory(s, reference)
            chosen = _Iterate(0, traj, mu_ref, objective_value_exact(s, traj), verify(s, traj))

        trace = RobustnessTrace.from_trajectory(chosen.trajectory, s.goals, mu=chosen.mu)
        result = PlanResult(
            status=status,
            trajectory=chosen.trajectory,
            trace=trace,
            records=records,
            report=chosen.report,
            best_iteration=chosen.iteration if best is not None else None,
        )
        logger.info(f"Plan finished: {result}")
        return result

    @staticmethod
    def _failure_status(solver_status: SolveStatus, have_verified: bool) -> PlanStatus:
        """Plan status after a subproblem that still failed its elastic retry."""
        if solver_status == SolveStatus.NUMERICAL_FAILURE:
            return PlanStatus.NUMERICAL_FAILURE
        if solver_status == SolveStatus.INFEASIBLE_DETECTED:
            return PlanStatus.INFEASIBLE
        # the solver ran out of iterations; nothing was shown infeasible
        return PlanStatus.MAX_ITERS if have_verified else PlanStatus.UNVERIFIED

    @staticmethod
    def _solve_step(
        s: Scenario,
        reference: Trajectory,
        rho_ref: Sequence[np.ndarray],
        mu_ref: Sequence[np.ndarray],
        warm: Optional[SolveResult],
    ) -> Tuple[Subproblem, SolveResult, bool, float]:
        """
        Solve the strict subproblem; if it is infeasible or hits the iteration
        cap, retry once with the STL terminal rows made elastic and w3 doubled.

        Returns:
            (subproblem, result, elastic, total solve seconds)
        """
        p = s.params
        sub = build_subproblem(s, reference, rho_ref, mu_ref)
        res = solve(sub.program, tol=p.solver_tol, max_iters=p.solver_max_iters, warm_start=warm)
        if res.status not in (SolveStatus.INFEASIBLE_DETECTED, SolveStatus.MAX_ITERS):
            return sub, res, False, res.solve_time

        logger.warning(f"Subproblem {res.status.value}; retrying with elastic goal rows and w3 doubled")
        retry = build_subproblem(s, reference, rho_ref, mu_ref, elastic=True, w3_scale=2.0)
        res2 = solve(retry.program, tol=p.solver_tol, max_iters=p.solver_max_iters)
        return retry, res2, True, res.solve_time + res2.solve_time


def _runs(mask: Sequence[bool]) -> List[Tuple[int, int]]:
    """Maximal [start, stop) index ranges where mask is true."""
    runs: List[Tuple[int, int]] = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


initial_reference = PlanManager.initial_reference
repair_reference = PlanManager.repair_reference
update_references = PlanManager.update_references
finalize_trajectory = PlanManager.finalize_trajectory
plan = PlanManager.plan
