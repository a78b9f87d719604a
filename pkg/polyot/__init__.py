from .manifold import (
    CouplingManifold,
    ProductManifold,
    SupportMask,
    make_manifold,
    make_masked_manifold,
    make_product_manifold,
)
from .marginal import Marginal
from .objectives import (
    CootData,
    CootSquare,
    GromovFrobenius,
    LinearCost,
    Objective,
    RobustMaxCost,
    SquaredDistance,
)
from .sinkhorn import SinkhornConfig, sinkhorn_scale
from .solvers import (
    SolveResult,
    SolverConfig,
    SolveStatus,
    solve_rcg,
    solve_rgd,
    solve_rtr,
)

__version__ = "0.1.0"

__all__ = [
    "Marginal",
    "SinkhornConfig",
    "sinkhorn_scale",
    "CouplingManifold",
    "ProductManifold",
    "SupportMask",
    "make_manifold",
    "make_masked_manifold",
    "make_product_manifold",
    "Objective",
    "LinearCost",
    "SquaredDistance",
    "GromovFrobenius",
    "CootData",
    "CootSquare",
    "RobustMaxCost",
    "SolverConfig",
    "SolveStatus",
    "SolveResult",
    "solve_rgd",
    "solve_rcg",
    "solve_rtr",
]
