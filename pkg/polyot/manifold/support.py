import math
from dataclasses import dataclass

import numpy as np
import pydantic
from loguru import logger
from scipy import sparse
from scipy.sparse.csgraph import connected_components, maximum_bipartite_matching

from .._base import FrozenModel
from ..exceptions import (
    SinkhornConvergenceException,
    SupportRankException,
    SupportStructureException,
    TotalSupportException,
)
from ..sinkhorn import SinkhornConfig, sinkhorn_scale

EXACT_CHECK_MAX_SIDE = 64


@dataclass
class SupportVerdict:
    ok: bool
    entry: tuple[int, int] | None = None
    """first allowed entry found on no positive diagonal"""

    def __bool__(self) -> bool:
        return self.ok


def support_components(allowed: np.ndarray) -> int:
    """Number of connected components of the bipartite row/column support graph."""
    m, n = allowed.shape
    biadjacency = sparse.csr_matrix(allowed.astype(np.int8))
    graph = sparse.bmat([[None, biadjacency], [biadjacency.T, None]], format="csr")
    n_components, _ = connected_components(graph, directed=False)
    return int(n_components)


def _replicate_square(allowed: np.ndarray) -> tuple[np.ndarray, int, int]:
    m, n = allowed.shape
    g = math.gcd(m, n)
    row_copies, col_copies = n // g, m // g
    square = np.kron(allowed, np.ones((row_copies, col_copies), dtype=bool))
    return square, row_copies, col_copies


def _exact_check(allowed: np.ndarray) -> SupportVerdict:
    square, row_copies, col_copies = _replicate_square(allowed)
    size = square.shape[0]
    graph = sparse.csr_matrix(square.astype(np.int8))
    match = maximum_bipartite_matching(graph, perm_type="column")
    entries = np.argwhere(allowed)
    if np.any(match < 0):
        i, j = entries[0]
        return SupportVerdict(False, (int(i), int(j)))

    # an unmatched edge (i, j) lies on a perfect matching iff it closes an
    # alternating cycle: row i and column j share a strongly connected component
    rows, cols = np.nonzero(square)
    free = match[rows] != cols
    # column node size + c points back to the row matched to c
    row_of_col = np.empty(size, dtype=np.int64)
    row_of_col[match] = np.arange(size)
    src = np.concatenate((rows[free], size + np.arange(size)))
    dst = np.concatenate((size + cols[free], row_of_col))
    digraph = sparse.csr_matrix(
        (np.ones(src.size, dtype=np.int8), (src, dst)), shape=(2 * size, 2 * size)
    )
    _, labels = connected_components(digraph, directed=True, connection="strong")
    for i, j in entries:
        r, c = i * row_copies, j * col_copies
        if match[r] != c and labels[r] != labels[size + c]:
            return SupportVerdict(False, (int(i), int(j)))
    return SupportVerdict(True)


def _sinkhorn_probe(allowed: np.ndarray, max_iter: int = 20000) -> SupportVerdict:
    m, n = allowed.shape
    cfg = SinkhornConfig(tol=1e-10, max_iter=max_iter, log_domain=False)
    try:
        plan = sinkhorn_scale(allowed.astype(float), np.full(m, 1 / m), np.full(n, 1 / n), cfg).plan
    except SinkhornConvergenceException as e:
        logger.debug(f"total-support probe did not converge: {e.residual:.3e}")
        scaled = None
    else:
        scaled = plan * m * n
    if scaled is not None and scaled[allowed].min() > 1e-8:
        return SupportVerdict(True)
    if scaled is None:
        return SupportVerdict(False, tuple(int(x) for x in np.argwhere(allowed)[0]))
    flat = np.where(allowed, scaled, np.inf).argmin()
    return SupportVerdict(False, tuple(int(x) for x in np.unravel_index(flat, allowed.shape)))


def total_support_check(
    allowed: np.ndarray, exact_max_side: int = EXACT_CHECK_MAX_SIDE
) -> SupportVerdict:
    """Check that every allowed entry lies on a positive diagonal of the pattern.

    Rectangular patterns are reduced to square ones by replicating each row
    ``n / gcd(m, n)`` times and each column ``m / gcd(m, n)`` times. Patterns
    with ``min(m, n) <= exact_max_side`` are decided exactly with a bipartite
    matching; larger ones with a Sinkhorn scaling probe.
    """
    allowed = np.asarray(allowed, dtype=bool)
    if min(allowed.shape) <= exact_max_side:
        return _exact_check(allowed)
    return _sinkhorn_probe(allowed)


class SupportMask(FrozenModel):
    """Boolean m x n pattern of entries allowed to be positive."""

    allowed: np.ndarray
    exact_max_side: int = EXACT_CHECK_MAX_SIDE

    @pydantic.field_validator("allowed", mode="before")
    @classmethod
    def _as_bool(cls, value):
        allowed = np.array(value, dtype=bool)
        if allowed.ndim != 2:
            raise SupportStructureException(
                "support mask must be a matrix", {"shape": list(allowed.shape)}
            )
        allowed.setflags(write=False)
        return allowed

    @pydantic.model_validator(mode="after")
    def _check_structure(self):
        allowed = self.allowed
        m, n = allowed.shape
        empty_rows = np.flatnonzero(~allowed.any(axis=1))
        empty_cols = np.flatnonzero(~allowed.any(axis=0))
        if empty_rows.size or empty_cols.size:
            raise SupportStructureException(
                "support mask has an empty row or column",
                {"rows": empty_rows.tolist(), "cols": empty_cols.tolist()},
            )
        verdict = total_support_check(allowed, self.exact_max_side)
        if not verdict:
            raise TotalSupportException(
                f"entry {verdict.entry} of the support mask lies on no positive diagonal",
                {"entry": list(verdict.entry)},
            )
        count = int(allowed.sum())
        if count <= m + n - 1:
            raise SupportRankException(
                "support leaves no free directions: need more than m + n - 1 allowed entries",
                {"allowed": count, "m": m, "n": n},
            )
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.allowed.shape

    @property
    def is_full(self) -> bool:
        return bool(self.allowed.all())

    @property
    def components(self) -> int:
        return support_components(self.allowed)

    @classmethod
    def from_text(cls, text: str) -> "SupportMask":
        """Parse a grid of 0/1 characters, one row per line."""
        rows = [line.strip() for line in text.splitlines() if line.strip()]
        bad = {ch for row in rows for ch in row if ch not in "01"}
        if not rows or bad or len({len(row) for row in rows}) != 1:
            raise SupportStructureException(
                "mask text must be a rectangular grid of 0/1 characters",
                {"bad_chars": sorted(bad)},
            )
        return cls(allowed=np.array([[ch == "1" for ch in row] for row in rows]))

    def to_text(self) -> str:
        return "\n".join("".join("1" if x else "0" for x in row) for row in self.allowed) + "\n"
