import pydantic

from .._base import FrozenModel
from ..exceptions import ConfigException


class SinkhornConfig(FrozenModel):
    tol: float = 1e-9
    """stop once both marginal residuals are below this, in the inf-norm"""
    max_iter: int = 10000
    log_domain: bool = True
    """run the fixed point on log-scalings with log-sum-exp"""
    exp_cap: float = 30.0
    """largest admissible entry of xi / gamma inside a retraction"""

    @pydantic.model_validator(mode="after")
    def _check(self):
        if not self.tol > 0:
            raise ConfigException("sinkhorn tol must be positive", {"tol": self.tol})
        if self.max_iter < 1:
            raise ConfigException("sinkhorn max_iter must be >= 1", {"max_iter": self.max_iter})
        if not self.exp_cap > 0:
            raise ConfigException("exp_cap must be positive", {"exp_cap": self.exp_cap})
        return self
