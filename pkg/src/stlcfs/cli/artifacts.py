"""
Run artifacts: trajectory / robustness / iteration CSVs, report and summary
JSON, and the whitespace-delimited plot tables written by `report`.

Trajectory floats are written with repr precision and table floats with 17
significant digits, so a reload reproduces them exactly. The trajectory CSV
goes through `csv` to report the failing row and column; the plain tables go
through np.savetxt and np.loadtxt.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from stlcfs.core.errors import TrajectoryFormatError
from stlcfs.core.settings import (
    FIG1_PATH,
    FIG2_OBJECTIVE,
    FIG3_TIME,
    FIG4_MU,
    ITERATIONS_CSV,
    REPORT_JSON,
    ROBUSTNESS_CSV,
    SUMMARY_JSON,
    TRAJECTORY_CSV,
)
from stlcfs.core.utils import format_float
from stlcfs.dynamics.model import Trajectory
from stlcfs.planner.schemas import IterationRecord
from stlcfs.stl.robustness import RobustnessTrace
from stlcfs.verify.schemas import VerificationReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FMT = "%.17g"

TRAJECTORY_COLUMNS = ["t", "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az"]
ROBUSTNESS_COLUMNS = ["t", "k", "rho_exact", "mu"]
ITERATION_COLUMNS = ["iter", "exact_obj", "surrogate_obj", "step_inf_norm", "solver_status", "solve_time_s"]


class RunSummary(BaseModel):
    """Contents of summary.json."""
    status: str
    passed: bool
    exit_code: int
    scenario: str
    overrides: List[str] = Field(default_factory=list)
    iterations: int
    best_iteration: Optional[int] = None
    exact_objective: Optional[float] = None
    total_solve_time_s: float = 0.0
    files: List[str] = Field(default_factory=list)


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        for i in range(traj.T):
            accel = [format_float(v) for v in traj.a[i]] if i < traj.T - 1 else ["", "", ""]
            writer.writerow(
                [i + 1] + [format_float(v) for v in traj.x[i]] + [format_float(v) for v in traj.v[i]] + accel
            )


def _parse_cell(raw: str, row: int, column: str) -> float:
    try:
        value = float(raw)
    except ValueError as e:
        raise TrajectoryFormatError(f"not a number: '{raw}'", row=row, column=column) from e
    if not math.isfinite(value):
        raise TrajectoryFormatError(f"non-finite value '{raw}'", row=row, column=column)
    return value


def read_trajectory_csv(path: PathLike) -> Trajectory:
    """
    Read a trajectory.csv. Rows must be numbered 1 … T in order; the last row
    has blank accelerations.

    Raises:
        TrajectoryFormatError: with the offending row (1-based data row) and column
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise TrajectoryFormatError(f"cannot read {path}: {e}") from e

    if not rows:
        raise TrajectoryFormatError("file is empty", row=0)
    header = [h.strip() for h in rows[0]]
    if header != TRAJECTORY_COLUMNS:
        raise TrajectoryFormatError(f"header must be {','.join(TRAJECTORY_COLUMNS)}, got {','.join(header)}", row=0)
    data = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    T = len(data)
    if T < 2:
        raise TrajectoryFormatError(f"need at least 2 data rows, got {T}", row=T)

    x = np.zeros((T, 3))
    v = np.zeros((T, 3))
    a = np.zeros((T - 1, 3))
    for i, cells in enumerate(data):
        row = i + 1
        if len(cells) != len(TRAJECTORY_COLUMNS):
            raise TrajectoryFormatError(
                f"expected {len(TRAJECTORY_COLUMNS)} columns, got {len(cells)}", row=row
            )
        t = _parse_cell(cells[0], row, "t")
        if t != row:
            raise TrajectoryFormatError(f"step {cells[0]} out of order, expected {row}", row=row, column="t")
        for j, name in enumerate(("x", "y", "z")):
            x[i, j] = _parse_cell(cells[1 + j], row, name)
        for j, name in enumerate(("vx", "vy", "vz")):
            v[i, j] = _parse_cell(cells[4 + j], row, name)
        accel_cells = cells[7:10]
        if i < T - 1:
            for j, name in enumerate(("ax", "ay", "az")):
                a[i, j] = _parse_cell(accel_cells[j], row, name)
        elif any(cell.strip() for cell in accel_cells):
            raise TrajectoryFormatError("accelerations must be blank on the last row", row=row, column="ax")
    return Trajectory(x, v, a)


def _save_table(
    path: PathLike, columns: Sequence[str], rows: Sequence[Sequence[object]], fmt: Sequence[str], delimiter: str
) -> None:
    """Header line plus one formatted line per row, through np.savetxt."""
    data = np.array(rows, dtype=object).reshape(len(rows), len(columns))
    np.savetxt(
        path, data, fmt=list(fmt), delimiter=delimiter, header=delimiter.join(columns), comments="", encoding="utf-8"
    )


def _load_table(path: PathLike, columns: Sequence[str]) -> np.ndarray:
    """Cells of a comma table as strings, shape (rows, len(columns))."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0].split(",") != list(columns):
        raise TrajectoryFormatError(f"header of {path} must be {','.join(columns)}", row=0)
    if not any(line.strip() for line in lines[1:]):
        return np.empty((0, len(columns)), dtype=str)
    return np.loadtxt(path, delimiter=",", skiprows=1, dtype=str, ndmin=2, encoding="utf-8")


def write_robustness_csv(trace: RobustnessTrace, path: PathLike) -> None:
    _save_table(path, ROBUSTNESS_COLUMNS, [[t, k, float(rho), float(mu)] for t, k, rho, mu in trace.rows()],
                ["%d", "%d", FLOAT_FMT, FLOAT_FMT], ",")


def read_robustness_csv(path: PathLike) -> List[Dict[str, float]]:
    return [
        {"t": int(t), "k": int(k), "rho_exact": float(rho), "mu": float(mu)}
        for t, k, rho, mu in _load_table(path, ROBUSTNESS_COLUMNS)
    ]


def write_iterations_csv(records: Sequence[IterationRecord], path: PathLike) -> None:
    rows = [
        [rec.iteration, float(rec.exact_obj), float(rec.surrogate_obj), float(rec.step), rec.solver_status,
         float(rec.solve_time)]
        for rec in records
    ]
    _save_table(path, ITERATION_COLUMNS, rows, ["%d", FLOAT_FMT, FLOAT_FMT, FLOAT_FMT, "%s", FLOAT_FMT], ",")


def read_iterations_csv(path: PathLike) -> List[Dict[str, object]]:
    return [
        {
            "iter": int(it),
            "exact_obj": float(exact),
            "surrogate_obj": float(surrogate),
            "step_inf_norm": float(step),
            "solver_status": status,
            "solve_time_s": float(elapsed),
        }
        for it, exact, surrogate, step, status, elapsed in _load_table(path, ITERATION_COLUMNS)
    ]


def write_json_model(model: BaseModel, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(model.json(indent=2))
        f.write("\n")


def write_run(
    out_dir: PathLike,
    traj: Trajectory,
    trace: RobustnessTrace,
    records: Sequence[IterationRecord],
    report: VerificationReport,
    summary: RunSummary,
) -> List[Path]:
    """Write the five run artifacts into out_dir; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / name for name in (TRAJECTORY_CSV, ROBUSTNESS_CSV, ITERATIONS_CSV, REPORT_JSON, SUMMARY_JSON)]
    write_trajectory_csv(traj, paths[0])
    write_robustness_csv(trace, paths[1])
    write_iterations_csv(records, paths[2])
    write_json_model(report, paths[3])
    write_json_model(summary.copy(update={"files": [p.name for p in paths]}), paths[4])
    logger.info(f"Wrote run artifacts to {out}")
    return paths


def write_report_data(out_dir: PathLike) -> List[Path]:
    """
    Turn the CSV artifacts of a run into plot tables:

        fig1_path.dat       t x y z
        fig2_objective.dat  iter exact_obj surrogate_obj
        fig3_time.dat       iter solve_time_s
        fig4_mu.dat         t mu_0 … mu_{K−1} (nan outside a goal's window)

    Raises:
        FileNotFoundError: when a required artifact is missing
    """
    out = Path(out_dir)
    for name in (TRAJECTORY_CSV, ROBUSTNESS_CSV, ITERATIONS_CSV):
        if not (out / name).is_file():
            raise FileNotFoundError(f"missing artifact {out / name}")

    traj = read_trajectory_csv(out / TRAJECTORY_CSV)
    robustness = read_robustness_csv(out / ROBUSTNESS_CSV)
    iterations = read_iterations_csv(out / ITERATIONS_CSV)

    paths = [out / FIG1_PATH, out / FIG2_OBJECTIVE, out / FIG3_TIME, out / FIG4_MU]
    _save_table(paths[0], ["t", "x", "y", "z"],
                [[t + 1] + [float(c) for c in traj.x[t]] for t in range(traj.T)], ["%d"] + [FLOAT_FMT] * 3, " ")
    _save_table(paths[1], ["iter", "exact_obj", "surrogate_obj"],
                [[r["iter"], r["exact_obj"], r["surrogate_obj"]] for r in iterations], ["%d", FLOAT_FMT, FLOAT_FMT], " ")
    _save_table(paths[2], ["iter", "solve_time_s"],
                [[r["iter"], r["solve_time_s"]] for r in iterations], ["%d", FLOAT_FMT], " ")

    K = max((r["k"] for r in robustness), default=-1) + 1
    mu = np.full((traj.T, K), np.nan)
    for r in robustness:
        mu[r["t"] - 1, r["k"]] = r["mu"]
    _save_table(paths[3], ["t"] + [f"mu_{k}" for k in range(K)],
                [[t + 1] + [float(c) for c in mu[t]] for t in range(traj.T)], ["%d"] + [FLOAT_FMT] * K, " ")
    logger.info(f"Wrote {len(paths)} plot tables to {out}")
    return paths
