from ._base import SinkhornConfig
from .scaling import (
    ScalingResult,
    entropic_lmo,
    marginal_residual,
    sinkhorn_scale,
    sinkhorn_scale_log,
    sinkhorn_scale_log_batched,
)

__all__ = [
    "SinkhornConfig",
    "ScalingResult",
    "sinkhorn_scale",
    "sinkhorn_scale_log",
    "sinkhorn_scale_log_batched",
    "entropic_lmo",
    "marginal_residual",
]
