from stlcfs.assembly.layout import VariableLayout
from stlcfs.assembly.builder import (
    Subproblem,
    audit_convexity,
    build_subproblem,
    linearized_objective,
    objective_value_exact,
    rho_relaxation_gaps,
    row_counts,
    surrogate_objective,
)

__all__ = [
    "Subproblem",
    "VariableLayout",
    "audit_convexity",
    "build_subproblem",
    "linearized_objective",
    "objective_value_exact",
    "rho_relaxation_gaps",
    "row_counts",
    "surrogate_objective",
]
