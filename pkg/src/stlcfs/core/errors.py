"""
Exception types raised by the library. The CLI maps them to exit codes.
"""

from typing import TYPE_CHECKING, List, Optional

if TYPE_CHECKING:
    from stlcfs.scenario.schemas import Violation


class StlCfsError(ValueError):
    """Base class for all stlcfs errors."""


class ScenarioParseError(StlCfsError):
    """Scenario file is missing, is not JSON, or does not match the schema."""


class ScenarioValidationError(StlCfsError):
    """Scenario parsed but violates one or more invariants."""

    def __init__(self, violations: List["Violation"]):
        self.violations = violations
        details = "; ".join(f"{v.field}: {v.message} [{v.code}]" for v in violations)
        super().__init__(f"Invalid scenario: {details}")


class DimensionMismatchError(StlCfsError):
    """Arrays handed to a builder do not match the scenario dimensions."""


class ConicProgramError(StlCfsError):
    """A ConicProgram violates its structural invariants."""


class TrajectoryFormatError(StlCfsError):
    """A trajectory CSV does not match the expected schema."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
