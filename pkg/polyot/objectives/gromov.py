from typing import Callable

import numpy as np

from ..exceptions import ShapeMismatchException, ValidationException
from ..marginal import MarginalLike, as_weights
from ._base import Objective
from .linear import as_cost_matrix

REFERENCE_MAX_DIM = 32

Loss = Callable[[float, float], float]


def square_loss(a: float, b: float) -> float:
    return (a - b) ** 2


def check_reference_dims(*dims: int):
    if max(dims) > REFERENCE_MAX_DIM:
        raise ValidationException(
            f"reference evaluators are limited to dimensions <= {REFERENCE_MAX_DIM}",
            {"dims": list(dims)},
        )


def _as_similarity(S, name: str) -> np.ndarray:
    S = as_cost_matrix(S, name)
    if S.shape[0] != S.shape[1]:
        raise ShapeMismatchException(f"{name} must be square", {"shape": list(S.shape)})
    return S


class GromovFrobenius(Objective):
    """Gromov-Wasserstein objective for the squared loss, up to constants: ``-<G' S1 G, S2>``.

    Nonsymmetric similarities are handled by the two-term gradient. For the
    squared loss the full discrepancy of a coupling with marginals
    ``(mu1, mu2)`` is ``constant(mu1, mu2) + 2 * cost(G)``; see
    :meth:`discrepancy`.
    """

    is_quadratic = True

    def __init__(self, S1, S2):
        self.S1 = _as_similarity(S1, "S1")
        self.S2 = _as_similarity(S2, "S2")

    @property
    def shapes(self):
        return ((self.S1.shape[0], self.S2.shape[0]),)

    def _bilinear(self, A: np.ndarray) -> np.ndarray:
        return self.S1 @ A @ self.S2.T + self.S1.T @ A @ self.S2

    def _cost(self, points):
        G = points[0]
        return -np.sum((self.S1 @ G @ self.S2.T) * G)

    def _egrad(self, points):
        return (-self._bilinear(points[0]),)

    def _ehess(self, points, xi):
        return (-self._bilinear(xi[0]),)

    def constant(self, mu1: MarginalLike, mu2: MarginalLike) -> float:
        """``sum S1_ik^2 mu1_i mu1_k + sum S2_jl^2 mu2_j mu2_l``."""
        p, q = as_weights(mu1), as_weights(mu2)
        return float(p @ (self.S1**2) @ p + q @ (self.S2**2) @ q)

    def discrepancy(self, gamma: np.ndarray, mu1: MarginalLike, mu2: MarginalLike) -> float:
        """Squared-loss GW value of ``gamma``, matching :func:`gw_reference_cost`."""
        return self.constant(mu1, mu2) + 2.0 * self.cost(gamma)


def gw_frobenius(S1, S2) -> GromovFrobenius:
    return GromovFrobenius(S1, S2)


def gw_reference_cost(gamma, S1, S2, loss: Loss | None = None) -> float:
    """``sum_ijkl loss(S1_ik, S2_jl) G_ij G_kl`` by the literal quadruple loop."""
    loss = loss or square_loss
    gamma = np.asarray(gamma, dtype=float)
    S1 = _as_similarity(S1, "S1")
    S2 = _as_similarity(S2, "S2")
    m, n = gamma.shape
    if S1.shape[0] != m or S2.shape[0] != n:
        raise ShapeMismatchException(
            "similarity matrices do not match the coupling",
            {"coupling": [m, n], "S1": list(S1.shape), "S2": list(S2.shape)},
        )
    check_reference_dims(m, n)
    total = 0.0
    for i in range(m):
        for j in range(n):
            for k in range(m):
                for l in range(n):
                    total += loss(S1[i, k], S2[j, l]) * gamma[i, j] * gamma[k, l]
    return total
