from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.special import logsumexp

from ..exceptions import (
    ShapeMismatchException,
    SinkhornConvergenceException,
    SinkhornStructureException,
    ValidationException,
)
from ..marginal import MarginalLike, as_weights
from ._base import SinkhornConfig

DEFAULT_CONFIG = SinkhornConfig()


@dataclass
class ScalingResult:
    plan: np.ndarray
    n_iter: int
    residual: float

    def __iter__(self):
        return iter((self.plan, self.n_iter, self.residual))


def marginal_residual(plan: np.ndarray, mu1: np.ndarray, mu2: np.ndarray) -> float:
    rows = np.abs(plan.sum(axis=1) - mu1).max()
    cols = np.abs(plan.sum(axis=0) - mu2).max()
    return float(max(rows, cols))


def _check_shapes(shape: tuple, mu1: np.ndarray, mu2: np.ndarray):
    if len(shape) != 2 or shape != (mu1.size, mu2.size):
        raise ShapeMismatchException(
            "kernel shape does not match the marginals",
            {"kernel": list(shape), "mu1": mu1.size, "mu2": mu2.size},
        )


def _check_support(support: np.ndarray):
    empty_rows = np.flatnonzero(~support.any(axis=1))
    empty_cols = np.flatnonzero(~support.any(axis=0))
    if empty_rows.size or empty_cols.size:
        raise SinkhornStructureException(
            "kernel has an all-zero row or column",
            {"rows": empty_rows.tolist(), "cols": empty_cols.tolist()},
        )


def _scale_linear(K, mu1, mu2, cfg: SinkhornConfig) -> ScalingResult:
    v = np.ones(mu2.size)
    residual = np.inf
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for it in range(1, cfg.max_iter + 1):
            u = mu1 / (K @ v)
            Ktu = K.T @ u
            v = mu2 / Ktu
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise SinkhornConvergenceException(
                    "linear-domain scaling over- or underflowed", residual=float(residual)
                )
            residual = max(
                np.abs(u * (K @ v) - mu1).max(),
                np.abs(v * Ktu - mu2).max(),
            )
            if residual <= cfg.tol:
                return ScalingResult(u[:, None] * K * v[None, :], it, float(residual))
    raise SinkhornConvergenceException(
        f"sinkhorn did not reach tol={cfg.tol} in {cfg.max_iter} iterations",
        residual=float(residual),
    )


def _scale_log(log_K, mu1, mu2, cfg: SinkhornConfig) -> ScalingResult:
    log_mu1 = np.log(mu1)
    log_mu2 = np.log(mu2)
    f = np.zeros(mu1.size)
    g = np.zeros(mu2.size)
    residual = np.inf
    for it in range(1, cfg.max_iter + 1):
        f = log_mu1 - logsumexp(log_K + g[None, :], axis=1)
        g = log_mu2 - logsumexp(log_K + f[:, None], axis=0)
        plan = np.exp(log_K + f[:, None] + g[None, :])
        residual = marginal_residual(plan, mu1, mu2)
        if residual <= cfg.tol:
            return ScalingResult(plan, it, residual)
    raise SinkhornConvergenceException(
        f"sinkhorn did not reach tol={cfg.tol} in {cfg.max_iter} iterations",
        residual=float(residual),
    )


def sinkhorn_scale(
    K: np.ndarray,
    mu1: MarginalLike,
    mu2: MarginalLike,
    cfg: SinkhornConfig | None = None,
) -> ScalingResult:
    """Scale a nonnegative kernel to ``diag(u) K diag(v)`` with marginals ``(mu1, mu2)``.

    Zero entries of ``K`` stay exactly zero, so a masked kernel keeps its
    pattern; the pattern must have no empty row or column.

    Returns:
        ``ScalingResult(plan, n_iter, residual)``, unpackable as a tuple.
    """
    cfg = cfg or DEFAULT_CONFIG
    K = np.asarray(K, dtype=float)
    mu1, mu2 = as_weights(mu1), as_weights(mu2)
    _check_shapes(K.shape, mu1, mu2)
    if not np.all(np.isfinite(K)) or np.any(K < 0):
        raise SinkhornStructureException("kernel must be finite and nonnegative")
    _check_support(K > 0)
    if cfg.log_domain:
        with np.errstate(divide="ignore"):
            return _scale_log(np.log(K), mu1, mu2, cfg)
    return _scale_linear(K, mu1, mu2, cfg)


def sinkhorn_scale_log(
    log_K: np.ndarray,
    mu1: MarginalLike,
    mu2: MarginalLike,
    cfg: SinkhornConfig | None = None,
) -> ScalingResult:
    """Same fixed point as :func:`sinkhorn_scale`, for a kernel given by its logarithm.

    ``-inf`` marks structural zeros. Always runs in the log domain.
    """
    cfg = cfg or DEFAULT_CONFIG
    log_K = np.asarray(log_K, dtype=float)
    mu1, mu2 = as_weights(mu1), as_weights(mu2)
    _check_shapes(log_K.shape, mu1, mu2)
    if np.any(np.isnan(log_K)) or np.any(log_K == np.inf):
        raise SinkhornStructureException("log-kernel has NaN or +inf entries")
    _check_support(np.isfinite(log_K))
    return _scale_log(log_K, mu1, mu2, cfg)


def entropic_lmo(
    G: np.ndarray,
    mu1: MarginalLike,
    mu2: MarginalLike,
    epsilon: float,
    cfg: SinkhornConfig | None = None,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Entropic linear minimization oracle over the transport polytope.

    Solves ``min <P, G> + epsilon * sum P log P`` as the Sinkhorn scaling of
    ``exp(-G / epsilon)``. The ``-1`` from differentiating ``P log P`` is a
    constant kernel factor and is absorbed by the scaling.
    """
    if not epsilon > 0:
        raise ValidationException("epsilon must be positive", {"epsilon": epsilon})
    cfg = cfg or DEFAULT_CONFIG
    G = np.asarray(G, dtype=float)
    log_K = -G / epsilon
    if mask is not None:
        log_K = np.where(mask, log_K, -np.inf)
    if cfg.log_domain:
        return sinkhorn_scale_log(log_K, mu1, mu2, cfg).plan

    support = np.isfinite(log_K)
    K = np.zeros_like(log_K)
    K[support] = np.exp(log_K[support] - log_K[support].max())
    if np.any(K[support] == 0.0):
        logger.warning(
            f"entropic kernel underflows at epsilon={epsilon:g} in the linear domain, "
            "retrying in the log domain"
        )
        return sinkhorn_scale_log(log_K, mu1, mu2, cfg).plan
    return sinkhorn_scale(K, mu1, mu2, cfg).plan


def sinkhorn_scale_log_batched(
    log_K: np.ndarray,
    mu1: MarginalLike,
    mu2: MarginalLike,
    cfg: SinkhornConfig | None = None,
) -> np.ndarray:
    """Scale a stack of ``k`` log-kernels of shape ``(k, m, n)`` to the same marginals.

    Each slice stops updating once its own residual is below ``cfg.tol``, so
    every slice ends on the iterate a standalone :func:`sinkhorn_scale_log`
    call would return.
    """
    cfg = cfg or DEFAULT_CONFIG
    log_K = np.asarray(log_K, dtype=float)
    mu1, mu2 = as_weights(mu1), as_weights(mu2)
    if log_K.ndim != 3:
        raise ShapeMismatchException("batched kernel must be (k, m, n)", {"shape": list(log_K.shape)})
    _check_shapes(log_K.shape[1:], mu1, mu2)
    for slice_ in log_K:
        _check_support(np.isfinite(slice_))
    log_mu1, log_mu2 = np.log(mu1), np.log(mu2)
    k = log_K.shape[0]
    f = np.zeros((k, mu1.size))
    g = np.zeros((k, mu2.size))
    plans = np.empty_like(log_K)
    active = np.ones(k, dtype=bool)
    residual = np.full(k, np.inf)
    for _ in range(cfg.max_iter):
        idx = np.flatnonzero(active)
        lk = log_K[idx]
        f[idx] = log_mu1 - logsumexp(lk + g[idx][:, None, :], axis=2)
        g[idx] = log_mu2 - logsumexp(lk + f[idx][:, :, None], axis=1)
        plans[idx] = np.exp(lk + f[idx][:, :, None] + g[idx][:, None, :])
        for a in idx:
            residual[a] = marginal_residual(plans[a], mu1, mu2)
        active[idx] = residual[idx] > cfg.tol
        if not active.any():
            return plans
    raise SinkhornConvergenceException(
        f"batched sinkhorn did not reach tol={cfg.tol} in {cfg.max_iter} iterations",
        residual=float(residual.max()),
    )
