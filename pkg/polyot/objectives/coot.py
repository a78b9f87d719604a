import numpy as np
import pydantic

from .._base import FrozenModel
from ..exceptions import ShapeMismatchException
from ..marginal import Marginal, as_marginal
from ._base import Objective
from .gromov import check_reference_dims
from .linear import as_cost_matrix


class CootData(FrozenModel):
    """Two data matrices ``X`` (m x d1) and ``Z`` (n x d2) with sample and feature marginals."""

    X: np.ndarray
    Z: np.ndarray
    mu1: Marginal
    mu2: Marginal
    nu1: Marginal
    nu2: Marginal

    @pydantic.field_validator("X", "Z", mode="before")
    @classmethod
    def _as_matrix(cls, value, info: pydantic.ValidationInfo):
        return as_cost_matrix(value, info.field_name)

    @pydantic.field_validator("mu1", "mu2", "nu1", "nu2", mode="before")
    @classmethod
    def _as_marginal(cls, value):
        return as_marginal(value)

    @pydantic.model_validator(mode="after")
    def _check_dims(self):
        expected = {
            "mu1": self.X.shape[0],
            "mu2": self.Z.shape[0],
            "nu1": self.X.shape[1],
            "nu2": self.Z.shape[1],
        }
        got = {k: len(getattr(self, k)) for k in expected}
        if got != expected:
            raise ShapeMismatchException(
                "marginal lengths do not match the data matrices",
                {"expected": expected, "got": got},
            )
        return self

    @classmethod
    def uniform(cls, X, Z) -> "CootData":
        X, Z = np.asarray(X, dtype=float), np.asarray(Z, dtype=float)
        (m, d1), (n, d2) = X.shape, Z.shape
        return cls(
            X=X,
            Z=Z,
            mu1=Marginal.uniform(m),
            mu2=Marginal.uniform(n),
            nu1=Marginal.uniform(d1),
            nu2=Marginal.uniform(d2),
        )

    @property
    def sample_shape(self) -> tuple[int, int]:
        return (self.X.shape[0], self.Z.shape[0])

    @property
    def feature_shape(self) -> tuple[int, int]:
        return (self.X.shape[1], self.Z.shape[1])

    def sample_cost(self, feature_plan: np.ndarray) -> np.ndarray:
        """``M1_ij = sum_kl (X_ik - Z_jl)^2 P_kl`` for a feature coupling ``P``."""
        X, Z = self.X, self.Z
        return (
            ((X**2) @ self.nu1.weights)[:, None]
            + ((Z**2) @ self.nu2.weights)[None, :]
            - 2.0 * X @ feature_plan @ Z.T
        )

    def feature_cost(self, sample_plan: np.ndarray) -> np.ndarray:
        """``M2_kl = sum_ij (X_ik - Z_jl)^2 G_ij`` for a sample coupling ``G``."""
        X, Z = self.X, self.Z
        return (
            (self.mu1.weights @ (X**2))[:, None]
            + (self.mu2.weights @ (Z**2))[None, :]
            - 2.0 * X.T @ sample_plan @ Z
        )


class CootSquare(Objective):
    """Co-optimal transport cost of a sample coupling and a feature coupling, squared loss.

    ``sum_ijkl (X_ik - Z_jl)^2 G1_ij G2_kl``, evaluated through the marginal
    expansion, which is exact for couplings on their manifolds.
    """

    arity = 2
    is_quadratic = True

    def __init__(self, data: CootData):
        self.data = data
        X, Z = data.X, data.Z
        self._constant = float(
            data.mu1.weights @ (X**2) @ data.nu1.weights
            + data.mu2.weights @ (Z**2) @ data.nu2.weights
        )

    @property
    def shapes(self):
        return (self.data.sample_shape, self.data.feature_shape)

    def _cost(self, points):
        G1, G2 = points
        X, Z = self.data.X, self.data.Z
        return self._constant - 2.0 * np.sum(X * (G1 @ Z @ G2.T))

    def _cross(self, A1: np.ndarray, A2: np.ndarray):
        X, Z = self.data.X, self.data.Z
        return (-2.0 * X @ A2 @ Z.T, -2.0 * X.T @ A1 @ Z)

    def _egrad(self, points):
        return self._cross(*points)

    def _ehess(self, points, xi):
        return self._cross(*xi)

    def reference_cost(self, G1: np.ndarray, G2: np.ndarray) -> float:
        """Literal quadruple loop; dimensions are capped."""
        X, Z = self.data.X, self.data.Z
        (m, d1), (n, d2) = X.shape, Z.shape
        check_reference_dims(m, n, d1, d2)
        total = 0.0
        for i in range(m):
            for j in range(n):
                for k in range(d1):
                    for l in range(d2):
                        total += (X[i, k] - Z[j, l]) ** 2 * G1[i, j] * G2[k, l]
        return total

    def reference_sample_cost(self, G2: np.ndarray) -> np.ndarray:
        X, Z = self.data.X, self.data.Z
        (m, d1), (n, d2) = X.shape, Z.shape
        check_reference_dims(m, n, d1, d2)
        M = np.zeros((m, n))
        for i in range(m):
            for j in range(n):
                for k in range(d1):
                    for l in range(d2):
                        M[i, j] += (X[i, k] - Z[j, l]) ** 2 * G2[k, l]
        return M


def coot_square(data: CootData) -> CootSquare:
    return CootSquare(data)
