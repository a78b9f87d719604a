from ._base import (
    ArmijoConfig,
    BaseSolver,
    Iterate,
    Problem,
    SolveResult,
    SolverConfig,
    SolveStatus,
    TraceRecord,
    TrustRegionConfig,
)
from .linesearch import ArmijoLineSearch
from .listener import IterateStore, ProgressLogger, SolverBatchListener, SolverListener
from .rcg import RiemannianConjugateGradient, solve_rcg
from .rgd import RiemannianGradientDescent, solve_rgd
from .rtr import RiemannianTrustRegion, solve_rtr, truncated_cg

SOLVERS = {
    "rgd": RiemannianGradientDescent,
    "rcg": RiemannianConjugateGradient,
    "rtr": RiemannianTrustRegion,
}

__all__ = [
    "ArmijoConfig",
    "TrustRegionConfig",
    "SolverConfig",
    "SolveStatus",
    "TraceRecord",
    "SolveResult",
    "Iterate",
    "Problem",
    "BaseSolver",
    "ArmijoLineSearch",
    "SolverListener",
    "SolverBatchListener",
    "ProgressLogger",
    "IterateStore",
    "RiemannianGradientDescent",
    "RiemannianConjugateGradient",
    "RiemannianTrustRegion",
    "truncated_cg",
    "solve_rgd",
    "solve_rcg",
    "solve_rtr",
    "SOLVERS",
]
