from ._base import Objective, ScaledObjective, SeparableObjective, SumObjective, as_points
from .coot import CootData, CootSquare, coot_square
from .gromov import GromovFrobenius, gw_frobenius, gw_reference_cost, square_loss
from .linear import LinearCost, linear_ot
from .quadratic import QuadraticPenalty, SquaredDistance
from .robust import RobustMaxCost, robust_max

__all__ = [
    "Objective",
    "SumObjective",
    "ScaledObjective",
    "SeparableObjective",
    "as_points",
    "LinearCost",
    "linear_ot",
    "GromovFrobenius",
    "gw_frobenius",
    "gw_reference_cost",
    "square_loss",
    "CootData",
    "CootSquare",
    "coot_square",
    "RobustMaxCost",
    "robust_max",
    "SquaredDistance",
    "QuadraticPenalty",
]
