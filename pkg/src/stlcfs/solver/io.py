"""
Debug dump of a ConicProgram as a Matrix Market bundle:

    <stem>.P.mtx   objective matrix
    <stem>.A.mtx   constraint matrix
    <stem>.json    q, b, cones and row labels
"""

import json
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import scipy.io
import scipy.sparse as sp

from stlcfs.core.errors import ConicProgramError
from stlcfs.solver.schemas import ConeKind, ConicProgram

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _bundle_paths(path: PathLike) -> Tuple[Path, Path, Path]:
    stem = Path(path)
    if stem.suffix == ".json":
        stem = stem.with_suffix("")
    return (
        stem.parent / f"{stem.name}.P.mtx",
        stem.parent / f"{stem.name}.A.mtx",
        stem.parent / f"{stem.name}.json",
    )


def dump_program(prog: ConicProgram, path: PathLike) -> Path:
    """
    Write prog next to `path`; returns the path of the JSON header.
    """
    p_path, a_path, meta_path = _bundle_paths(path)
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(p_path), sp.coo_matrix(prog.P), comment="objective P", precision=17)
    scipy.io.mmwrite(str(a_path), sp.coo_matrix(prog.A), comment="constraints A", precision=17)
    meta = {
        "n": prog.n,
        "m": prog.m,
        "q": [float(v) for v in prog.q],
        "b": [float(v) for v in prog.b],
        "cones": [[kind.value, dim] for kind, dim in prog.cones],
        "row_labels": {name: list(span) for name, span in prog.row_labels.items()},
        "P": p_path.name,
        "A": a_path.name,
    }
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)
    logger.info(f"Dumped conic program (n={prog.n}, m={prog.m}) to {meta_path}")
    return meta_path


def load_program(path: PathLike) -> ConicProgram:
    """Read a bundle written by dump_program."""
    _, _, meta_path = _bundle_paths(path)
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
        P = sp.csc_matrix(scipy.io.mmread(str(meta_path.parent / meta["P"])))
        A = sp.csc_matrix(scipy.io.mmread(str(meta_path.parent / meta["A"])))
    except (OSError, KeyError, ValueError) as e:
        raise ConicProgramError(f"Cannot read program bundle {meta_path}: {e}") from e

    if A.shape[1] != meta["n"]:
        raise ConicProgramError(f"A has {A.shape[1]} columns, header says {meta['n']}")
    cones = [(ConeKind(kind), int(dim)) for kind, dim in meta["cones"]]
    labels = {name: (int(span[0]), int(span[1])) for name, span in meta.get("row_labels", {}).items()}
    return ConicProgram(P, np.asarray(meta["q"], dtype=float), A, np.asarray(meta["b"], dtype=float), cones, labels)
