"""
Schemas for verification reports.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    """
    Outcome of one check. `margin` is the worst-case slack in the check's
    units: negative means violated, and the check passes iff margin ≥ −tol.
    """
    name: str
    passed: bool
    margin: float
    unit: str = ""
    location: Dict[str, int] = Field(default_factory=dict)
    hard: bool = True
    message: Optional[str] = None


class VerificationReport(BaseModel):
    checks: List[CheckResult]
    passed: bool
    tol: float

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.hard and not c.passed]
