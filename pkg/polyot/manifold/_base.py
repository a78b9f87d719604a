from typing import Literal

import numpy as np
import pydantic

from .._base import FrozenModel
from ..exceptions import ConfigException


class ProjectionConfig(FrozenModel):
    tol: float = 1e-12
    """relative residual the multiplier solve must reach"""
    max_iter: int = 1000
    gauge: Literal["beta", "alpha"] = "beta"
    """which multiplier has its last entry pinned to zero"""

    @pydantic.model_validator(mode="after")
    def _check(self):
        if not self.tol > 0 or self.max_iter < 1:
            raise ConfigException(
                "projection tol must be positive and max_iter >= 1",
                {"tol": self.tol, "max_iter": self.max_iter},
            )
        return self


class BaseManifold:
    """Interface shared by coupling manifolds and their products.

    Points and tangent vectors are numpy arrays for a single coupling manifold
    and tuples of arrays for a product.
    """

    copies: int = 1

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def metric(self, point, eta, xi) -> float:
        raise NotImplementedError

    def norm(self, point, xi) -> float:
        return float(np.sqrt(max(self.metric(point, xi, xi), 0.0)))

    def project(self, point, ambient):
        raise NotImplementedError

    def retract(self, point, xi, cfg=None):
        raise NotImplementedError

    def egrad_to_rgrad(self, point, egrad):
        raise NotImplementedError

    def ehess_to_rhess(self, point, egrad, ehess_xi, xi):
        raise NotImplementedError

    def transport(self, point, new_point, xi):
        """Vector transport by projection onto the tangent space at ``new_point``."""
        return self.project(new_point, xi)

    def random_point(self, rng: np.random.Generator, scale: float = 0.1):
        raise NotImplementedError

    def random_tangent(self, point, rng: np.random.Generator):
        raise NotImplementedError

    def zero_vector(self, point):
        raise NotImplementedError

    def point_residual(self, point) -> float:
        """Largest marginal violation of ``point``; ``inf`` if it leaves the manifold."""
        raise NotImplementedError

    def lincomb(self, a: float, xi, b: float = 0.0, eta=None):
        """``a * xi + b * eta`` in the manifold's vector representation."""
        raise NotImplementedError
