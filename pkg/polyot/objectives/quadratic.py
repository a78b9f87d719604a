import numpy as np

from ..exceptions import ValidationException
from ._base import Objective
from .linear import as_cost_matrix


class SquaredDistance(Objective):
    """``||G - T||_F^2`` for a fixed target ``T``; minimized at ``T`` when ``T`` is a coupling."""

    is_quadratic = True

    def __init__(self, target):
        self.target = as_cost_matrix(target, "target")

    @property
    def shapes(self):
        return (self.target.shape,)

    def _cost(self, points):
        return np.sum((points[0] - self.target) ** 2)

    def _egrad(self, points):
        return (2.0 * (points[0] - self.target),)

    def _ehess(self, points, xi):
        return (2.0 * xi[0],)


class QuadraticPenalty(Objective):
    """``weight / 2 * ||G||_F^2``, a non-entropic regularizer for any coupling shape."""

    is_quadratic = True

    def __init__(self, weight: float = 1.0):
        if not weight >= 0:
            raise ValidationException("penalty weight must be nonnegative", {"weight": weight})
        self.weight = float(weight)

    @property
    def name(self) -> str:
        return f"QuadraticPenalty({self.weight:g})"

    def _cost(self, points):
        return 0.5 * self.weight * np.sum(points[0] ** 2)

    def _egrad(self, points):
        return (self.weight * points[0],)

    def _ehess(self, points, xi):
        return (self.weight * xi[0],)
