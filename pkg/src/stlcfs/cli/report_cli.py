"""
`stlcfs report`: plot-ready tables from a finished run directory.
"""

from pathlib import Path

import typer
from rich.console import Console

from stlcfs.cli.artifacts import write_report_data
from stlcfs.core.errors import StlCfsError
from stlcfs.core.settings import EXIT_USAGE

console = Console()


def report_cmd(
    out_dir: Path = typer.Argument(..., help="Run directory written by `plan`"),
):
    """
    Write fig1_path.dat, fig2_objective.dat, fig3_time.dat and fig4_mu.dat.
    """
    try:
        paths = write_report_data(out_dir)
    except (FileNotFoundError, StlCfsError, KeyError, ValueError) as e:
        console.print(f"Error: {e}", style="bold red")
        raise typer.Exit(code=EXIT_USAGE)
    for path in paths:
        console.print(f"Wrote {path}")
