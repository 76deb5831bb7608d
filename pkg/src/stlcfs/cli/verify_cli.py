"""
`stlcfs verify` and `stlcfs validate`: check files without planning.
"""

import json
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from stlcfs.cli.artifacts import read_trajectory_csv
from stlcfs.core.errors import StlCfsError, TrajectoryFormatError
from stlcfs.core.settings import EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED
from stlcfs.scenario.loader import load_scenario, read_scenario_dict, validate
from stlcfs.scenario.schemas import Scenario
from stlcfs.verify.checks import verify

err_console = Console(stderr=True)


def verify_cmd(
    scenario_path: Path = typer.Argument(..., help="Scenario JSON file"),
    trajectory_csv: Path = typer.Argument(..., help="trajectory.csv to check"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Absolute tolerance (default: STL_CFS_VERIFY_TOL)"),
):
    """
    Verify a trajectory against the exact constraints and goals. Prints the report as JSON.
    """
    try:
        scenario = load_scenario(scenario_path)
        traj = read_trajectory_csv(trajectory_csv)
    except TrajectoryFormatError as e:
        err_console.print(f"Error in {trajectory_csv}: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)
    except StlCfsError as e:
        err_console.print(f"Error: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)

    if traj.T != scenario.T:
        err_console.print(
            f"Error in {trajectory_csv}: row {traj.T}: trajectory has {traj.T} steps, scenario has {scenario.T}",
            style="bold red",
        )
        raise typer.Exit(code=EXIT_USAGE)

    report = verify(scenario, traj, tol=tol)
    typer.echo(report.json(indent=2))
    for check in report.failures:
        err_console.print(
            f"FAIL {check.name}: margin {check.margin:.6g} {check.unit} at {check.location}", style="bold red"
        )
    raise typer.Exit(code=EXIT_OK if report.passed else EXIT_VERIFY_FAILED)


def validate_cmd(
    scenario_path: Path = typer.Argument(..., help="Scenario JSON file"),
):
    """
    Check a scenario file and print its violations as JSON (an empty list when valid).
    """
    try:
        scenario = Scenario.parse_obj(read_scenario_dict(scenario_path))
        violations = validate(scenario)
    except StlCfsError as e:
        err_console.print(f"Error: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)
    except ValueError as e:
        err_console.print(f"Error: scenario does not match schema: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)

    typer.echo(json.dumps([v.dict() for v in violations], indent=2))
    raise typer.Exit(code=EXIT_OK if not violations else EXIT_USAGE)
