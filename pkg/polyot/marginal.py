from typing import Union

import numpy as np
import pydantic

from ._base import FrozenModel
from .exceptions import ValidationException

MASS_TOL = 1e-12


class Marginal(FrozenModel):
    """Strictly positive probability vector: a row or column marginal of a coupling."""

    weights: np.ndarray

    @pydantic.field_validator("weights", mode="before")
    @classmethod
    def _check_weights(cls, value):
        weights = np.array(value, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise ValidationException(
                "marginal must be a non-empty vector", {"shape": list(weights.shape)}
            )
        if not np.all(np.isfinite(weights)):
            raise ValidationException("marginal has non-finite entries")
        if np.any(weights <= 0):
            raise ValidationException(
                "marginal entries must be strictly positive",
                {"min": float(weights.min()), "argmin": int(weights.argmin())},
            )
        total = float(weights.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationException(
                f"marginal must sum to 1, got {total!r}", {"sum": total}
            )
        weights.setflags(write=False)
        return weights

    @classmethod
    def uniform(cls, k: int) -> "Marginal":
        return cls(weights=np.full(k, 1.0 / k))

    def __len__(self) -> int:
        return self.weights.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Marginal):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    __hash__ = None


MarginalLike = Union[Marginal, np.ndarray, list, tuple]


def as_marginal(value: MarginalLike) -> Marginal:
    if isinstance(value, Marginal):
        return value
    return Marginal(weights=value)


def as_weights(value: MarginalLike) -> np.ndarray:
    """Weights of a marginal without re-validating; raw arrays are only cast."""
    if isinstance(value, Marginal):
        return value.weights
    return np.asarray(value, dtype=float)
