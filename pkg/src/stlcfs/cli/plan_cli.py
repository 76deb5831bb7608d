"""
`stlcfs plan`: run the planner on a scenario and write the run artifacts.
"""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from stlcfs.cli.artifacts import RunSummary, write_run
from stlcfs.core.errors import StlCfsError
from stlcfs.core.settings import DEFAULT_SCENARIO_FILE, EXIT_INFEASIBLE, EXIT_OK, EXIT_UNVERIFIED, EXIT_USAGE
from stlcfs.planner.manager import PlanResult, plan
from stlcfs.planner.schemas import PlanStatus
from stlcfs.scenario.loader import apply_overrides, parse_scenario, read_scenario_dict

logger = logging.getLogger(__name__)
console = Console()


def exit_code_for(result: PlanResult) -> int:
    if result.status == PlanStatus.CONVERGED and result.verified:
        return EXIT_OK
    if result.status in (PlanStatus.INFEASIBLE, PlanStatus.NUMERICAL_FAILURE):
        return EXIT_INFEASIBLE
    return EXIT_UNVERIFIED


def _iteration_table(result: PlanResult) -> Table:
    table = Table(title="Outer iterations")
    table.add_column("Iter", style="cyan", justify="right")
    table.add_column("Exact J", style="green", justify="right")
    table.add_column("Surrogate", justify="right")
    table.add_column("Step [m]", justify="right")
    table.add_column("Solver", style="magenta")
    table.add_column("Time [s]", justify="right")
    for rec in result.records:
        table.add_row(
            str(rec.iteration),
            f"{rec.exact_obj:.6f}",
            f"{rec.surrogate_obj:.6f}",
            f"{rec.step:.3e}",
            rec.solver_status + (" (elastic)" if rec.elastic else ""),
            f"{rec.solve_time:.3f}",
        )
    return table


def plan_cmd(
    scenario_path: Path = typer.Argument(
        Path(DEFAULT_SCENARIO_FILE), help="Scenario JSON file, or a file name inside STL_CFS_SCENARIO_DIR"
    ),
    out: Path = typer.Option(Path("run"), "--out", "-o", help="Directory for run artifacts"),
    overrides: Optional[List[str]] = typer.Option(
        None, "--set", "-s", help="Override a scenario field, e.g. --set weights.w3=0 (repeatable)"
    ),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Do not print the iteration table"),
):
    """
    Plan a trajectory and write trajectory, robustness, iteration, report and summary files.
    """
    overrides = list(overrides or [])
    try:
        data = apply_overrides(read_scenario_dict(scenario_path), overrides)
        scenario = parse_scenario(data)
    except StlCfsError as e:
        console.print(f"Error: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)

    result = plan(scenario)
    code = exit_code_for(result)
    best = next((r for r in result.records if r.iteration == result.best_iteration), None)
    summary = RunSummary(
        status=result.status.value,
        passed=result.report.passed,
        exit_code=code,
        scenario=str(scenario_path),
        overrides=overrides,
        iterations=len(result.records),
        best_iteration=result.best_iteration,
        exact_objective=best.exact_obj if best else None,
        total_solve_time_s=sum(r.solve_time for r in result.records),
    )

    try:
        paths = write_run(out, result.trajectory, result.trace, result.records, result.report, summary)
    except OSError as e:
        console.print(f"Error: cannot write artifacts to {out}: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)

    if not quiet:
        console.print(_iteration_table(result))
    style = "bold green" if code == EXIT_OK else "bold yellow" if code == EXIT_UNVERIFIED else "bold red"
    console.print(
        f"Status: {result.status.value}, verified: {result.verified}, wrote {len(paths)} files to {out}",
        style=style,
    )
    for check in result.report.failures:
        console.print(f"  {check.name}: margin {check.margin:.6g} {check.unit} at {check.location}")
    raise typer.Exit(code=code)
