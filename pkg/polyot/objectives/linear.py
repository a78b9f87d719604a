import numpy as np

from ..exceptions import ValidationException
from ._base import Objective


def as_cost_matrix(C, name: str = "cost matrix") -> np.ndarray:
    C = np.array(C, dtype=float)
    if C.ndim != 2:
        raise ValidationException(f"{name} must be a matrix", {"shape": list(C.shape)})
    if not np.all(np.isfinite(C)):
        raise ValidationException(f"{name} has non-finite entries")
    C.setflags(write=False)
    return C


class LinearCost(Objective):
    """Classical transport cost ``<G, C>``."""

    is_quadratic = True

    def __init__(self, C):
        self.C = as_cost_matrix(C)

    @property
    def shapes(self):
        return (self.C.shape,)

    def _cost(self, points):
        return np.sum(points[0] * self.C)

    def _egrad(self, points):
        return (self.C,)

    def _ehess(self, points, xi):
        return (np.zeros_like(self.C),)


def linear_ot(C) -> LinearCost:
    return LinearCost(C)
