from stlcfs.solver.schemas import (
    Cone,
    ConeKind,
    ConicProgram,
    ConstraintBlock,
    SolveResult,
    SolveStatus,
    merge_cones,
)
from stlcfs.solver.cones import ConeIndex, cone_project
from stlcfs.solver.admm import AdmmOptions, solve
from stlcfs.solver.io import dump_program, load_program

__all__ = [
    "AdmmOptions",
    "Cone",
    "ConeIndex",
    "ConeKind",
    "ConicProgram",
    "ConstraintBlock",
    "SolveResult",
    "SolveStatus",
    "cone_project",
    "dump_program",
    "load_program",
    "merge_cones",
    "solve",
]
