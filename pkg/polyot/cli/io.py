import csv
import json
from pathlib import Path

import numpy as np

from ..exceptions import DataFileException
from ..manifold import SupportMask
from ..marginal import Marginal
from ..solvers import SolveResult

FLOAT_FORMAT = "%.17g"
TRACE_HEADER = ["iter", "elapsed_sec", "cost", "grad_norm", "step_size"]


def read_matrix(path: str | Path) -> np.ndarray:
    """Dense row-major CSV without header."""
    try:
        A = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except (OSError, ValueError) as e:
        raise DataFileException(f"cannot read matrix from {path}: {e}", {"path": str(path)})
    if A.size == 0 or not np.all(np.isfinite(A)):
        raise DataFileException(f"{path} is empty or holds non-finite values", {"path": str(path)})
    return A


def write_matrix(path: str | Path, A: np.ndarray):
    np.savetxt(path, np.atleast_2d(A), delimiter=",", fmt=FLOAT_FORMAT)


def read_marginal(path: str | Path) -> Marginal:
    """Single-column CSV of strictly positive weights summing to one."""
    A = read_matrix(path)
    if A.shape[1] != 1:
        raise DataFileException(
            f"marginal file {path} must have a single column", {"shape": list(A.shape)}
        )
    return Marginal(weights=A[:, 0])


def write_marginal(path: str | Path, weights: np.ndarray):
    np.savetxt(path, np.asarray(weights).reshape(-1, 1), delimiter=",", fmt=FLOAT_FORMAT)


def read_mask(path: str | Path) -> SupportMask:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DataFileException(f"cannot read mask from {path}: {e}", {"path": str(path)})
    return SupportMask.from_text(text)


def _cell(value: float | None) -> str:
    return "" if value is None else FLOAT_FORMAT % value


def write_trace(path: str | Path, result: SolveResult, timing: bool = True):
    """Trace CSV; ``timing=False`` leaves ``elapsed_sec`` empty so reruns compare byte for byte."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in result.trace:
            writer.writerow(
                [
                    r.iter,
                    _cell(r.elapsed if timing else None),
                    _cell(r.cost),
                    _cell(r.grad_norm),
                    _cell(r.step_size),
                ]
            )


def read_trace(path: str | Path) -> list[dict[str, float | None]]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return [{k: (float(v) if v != "" else None) for k, v in row.items()} for row in rows]


def write_summary(path: str | Path, result: SolveResult, **extra):
    with open(path, "w") as f:
        json.dump({**result.summary(), **extra}, f, indent=2, default=str)
        f.write("\n")
