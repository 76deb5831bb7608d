"""
Top-level CLI: plan, verify, validate and report commands.
"""

import typer

from stlcfs.cli.plan_cli import plan_cmd
from stlcfs.cli.report_cli import report_cmd
from stlcfs.cli.verify_cli import validate_cmd, verify_cmd
from stlcfs.core.utils import configure_logging

# STL_CFS_LOG selects the level
configure_logging()

main_app = typer.Typer(help="stlcfs CLI: STL + convex feasible set trajectory planning")

main_app.command("plan")(plan_cmd)
main_app.command("verify")(verify_cmd)
main_app.command("validate")(validate_cmd)
main_app.command("report")(report_cmd)


def main():
    main_app()


if __name__ == "__main__":
    main()
