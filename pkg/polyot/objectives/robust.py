from typing import Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from ..exceptions import ShapeMismatchException, ValidationException
from ._base import Objective
from .linear import as_cost_matrix


class RobustMaxCost(Objective):
    """Worst case of a finite family of linear costs, ``max_k <G, C_k>``.

    With ``temperature > 0`` the max is replaced by the upper bound
    ``tau * log sum_k exp(<G, C_k> / tau)``, which is smooth and exceeds the
    hard max by at most ``tau * log p``. The hard max has no Hessian; its
    gradient is the cost matrix of the first maximizer.
    """

    def __init__(self, costs: Sequence, temperature: float = 0.0):
        if len(costs) == 0:
            raise ValidationException("robust cost needs at least one cost matrix")
        mats = [as_cost_matrix(C, f"cost matrix {k}") for k, C in enumerate(costs)]
        if len({C.shape for C in mats}) != 1:
            raise ShapeMismatchException(
                "cost matrices differ in shape", {"shapes": [list(C.shape) for C in mats]}
            )
        if not temperature >= 0:
            raise ValidationException("temperature must be >= 0", {"temperature": temperature})
        self.costs = np.stack(mats)
        self.costs.setflags(write=False)
        self.temperature = float(temperature)
        self.has_hessian = self.temperature > 0

    @property
    def name(self) -> str:
        return f"RobustMaxCost(p={len(self.costs)}, tau={self.temperature:g})"

    @property
    def shapes(self):
        return (self.costs.shape[1:],)

    def values(self, gamma: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ij->k", self.costs, gamma)

    def weights(self, gamma: np.ndarray) -> np.ndarray:
        v = self.values(gamma)
        if self.temperature == 0:
            w = np.zeros_like(v)
            w[np.argmax(v)] = 1.0
            return w
        return softmax(v / self.temperature)

    def _cost(self, points):
        v = self.values(points[0])
        if self.temperature == 0:
            return v.max()
        return self.temperature * logsumexp(v / self.temperature)

    def _egrad(self, points):
        return (np.einsum("k,kij->ij", self.weights(points[0]), self.costs),)

    def _ehess(self, points, xi):
        w = self.weights(points[0])
        dv = self.values(xi[0])
        dw = w * (dv - w @ dv) / self.temperature
        return (np.einsum("k,kij->ij", dw, self.costs),)


def robust_max(costs: Sequence, temperature: float = 0.0) -> RobustMaxCost:
    return RobustMaxCost(costs, temperature)
