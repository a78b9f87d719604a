from pathlib import Path
from typing import Literal

import numpy as np
from loguru import logger

from ..exceptions import DataFileException, ValidationException
from ..utils import as_generator, sample_simplex
from .io import write_marginal, write_matrix

ProblemKind = Literal["linear", "gw", "coot", "robust"]

DIMS_ARITY = {"linear": 2, "gw": 2, "robust": 2, "coot": 4}
MARGINALS = ("mu1", "mu2", "nu1", "nu2")
ROBUST_COSTS = 3


def generate_problem(kind: ProblemKind, dims: list[int], seed: int) -> dict[str, np.ndarray]:
    """Random instance: simplex marginals and matrices with uniform ``[0, 1)`` entries.

    ``dims`` is ``(m, n)``, or ``(m, n, d1, d2)`` for ``coot``. Similarity
    matrices are symmetrized as ``(A + A') / 2``.
    """
    if kind not in DIMS_ARITY:
        raise ValidationException(f"unknown problem kind {kind!r}", {"kind": kind})
    if len(dims) != DIMS_ARITY[kind] or min(dims) < 1:
        raise ValidationException(
            f"{kind} needs {DIMS_ARITY[kind]} positive dimensions, got {dims}", {"dims": dims}
        )
    rng = as_generator(seed)
    m, n = dims[:2]
    arrays = {"mu1": sample_simplex(rng, m), "mu2": sample_simplex(rng, n)}
    if kind == "linear":
        arrays["C"] = rng.uniform(size=(m, n))
    elif kind == "gw":
        A1, A2 = rng.uniform(size=(m, m)), rng.uniform(size=(n, n))
        arrays["S1"] = (A1 + A1.T) / 2
        arrays["S2"] = (A2 + A2.T) / 2
    elif kind == "robust":
        for k in range(ROBUST_COSTS):
            arrays[f"C{k}"] = rng.uniform(size=(m, n))
    else:
        d1, d2 = dims[2:]
        arrays["nu1"] = sample_simplex(rng, d1)
        arrays["nu2"] = sample_simplex(rng, d2)
        arrays["X"] = rng.uniform(size=(m, d1))
        arrays["Z"] = rng.uniform(size=(n, d2))
    return arrays


def write_problem(out_dir: str | Path, arrays: dict[str, np.ndarray]) -> list[Path]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, A in arrays.items():
            path = out_dir / f"{name}.csv"
            if name in MARGINALS:
                write_marginal(path, A)
            else:
                write_matrix(path, A)
            paths.append(path)
    except OSError as e:
        raise DataFileException(f"cannot write problem files to {out_dir}: {e}")
    logger.info(f"wrote {len(paths)} files to {out_dir}")
    return paths
