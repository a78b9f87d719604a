import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from ..exceptions import (
    ProjectionConvergenceException,
    RetractionOverflowException,
    ShapeMismatchException,
    ValidationException,
)
from ..marginal import Marginal
from ..sinkhorn import SinkhornConfig, sinkhorn_scale, sinkhorn_scale_log
from ..sinkhorn.scaling import marginal_residual
from ._base import BaseManifold, ProjectionConfig
from .support import SupportMask


class CouplingManifold(BaseManifold):
    """Strictly positive couplings with marginals ``(mu1, mu2)`` under the Fisher metric.

    ``g_G(eta, xi) = sum(eta * xi / G)``. With a support mask the manifold is
    restricted to couplings vanishing off the mask; every elementwise formula
    then runs on the support only and off-support entries stay exactly zero.
    """

    def __init__(
        self,
        mu1: Marginal,
        mu2: Marginal,
        mask: SupportMask | None = None,
        sinkhorn: SinkhornConfig | None = None,
        projection: ProjectionConfig | None = None,
    ):
        self.mu1 = mu1
        self.mu2 = mu2
        if mask is not None and mask.shape != (len(mu1), len(mu2)):
            raise ShapeMismatchException(
                "support mask shape does not match the marginals",
                {"mask": list(mask.shape), "marginals": [len(mu1), len(mu2)]},
            )
        self.support = None if mask is None or mask.is_full else mask
        self.sinkhorn = sinkhorn or SinkhornConfig()
        self.projection = projection or ProjectionConfig()

    def __repr__(self) -> str:
        masked = ", masked" if self.support is not None else ""
        return f"CouplingManifold({len(self.mu1)}x{len(self.mu2)}{masked})"

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.mu1), len(self.mu2))

    @property
    def mask(self) -> np.ndarray | None:
        return None if self.support is None else self.support.allowed

    @property
    def dim(self) -> int:
        m, n = self.shape
        if self.support is None:
            return (m - 1) * (n - 1)
        return int(self.mask.sum()) - (m + n - self.support.components)

    def _restrict(self, Z: np.ndarray) -> np.ndarray:
        return Z if self.support is None else np.where(self.mask, Z, 0.0)

    def _check_shape(self, *arrays: np.ndarray):
        for a in arrays:
            if a.shape != self.shape:
                raise ShapeMismatchException(
                    f"expected a {self.shape} matrix, got {a.shape}",
                    {"expected": list(self.shape), "got": list(a.shape)},
                )

    def _ratio(self, xi: np.ndarray, gamma: np.ndarray) -> np.ndarray:
        # xi / gamma with off-support entries defined as 0
        if self.support is None:
            return xi / gamma
        return np.divide(xi, gamma, out=np.zeros_like(xi), where=self.mask)

    # -- metric -----------------------------------------------------------

    def metric(self, gamma: np.ndarray, eta: np.ndarray, xi: np.ndarray) -> float:
        self._check_shape(gamma, eta, xi)
        on_support = gamma if self.support is None else gamma[self.mask]
        if np.any(on_support <= 0):
            raise ValidationException(
                "metric evaluated at a boundary point", {"min": float(on_support.min())}
            )
        return float(np.sum(eta * self._ratio(xi, gamma)))

    inner = metric

    # -- projection -------------------------------------------------------

    def _solve_reduced(self, G, p, q, a, b) -> tuple[np.ndarray, np.ndarray]:
        """Solve ``x * p + G y = a``, ``y * q + G.T x = b`` with ``y[-1] = 0``.

        ``x`` is eliminated and the Schur complement ``diag(q) - G.T diag(1/p) G``
        is solved for ``y[:-1]`` by preconditioned conjugate gradients; every
        matrix-vector product costs O(mn).
        """
        n = q.size
        y = np.zeros(n)
        rhs = (b - G.T @ (a / p))[:-1]
        rhs_norm = np.linalg.norm(rhs)
        if n > 1 and rhs_norm > 0:

            def schur(v):
                w = np.append(v, 0.0)
                return (q * w - G.T @ ((G @ w) / p))[:-1]

            diag = (q - np.einsum("ij,ij,i->j", G, G, 1.0 / p))[:-1]
            diag = np.where(diag > 1e-300, diag, 1.0)
            size = n - 1
            op = LinearOperator((size, size), matvec=schur, dtype=float)
            precond = LinearOperator((size, size), matvec=lambda v: v / diag, dtype=float)
            cfg = self.projection
            sol, _ = cg(op, rhs, rtol=cfg.tol * 1e-2, atol=0.0, maxiter=cfg.max_iter, M=precond)
            residual = float(np.linalg.norm(schur(sol) - rhs) / rhs_norm)
            if not residual <= cfg.tol:
                raise ProjectionConvergenceException(
                    f"tangent projection solve stalled at relative residual {residual:.3e}",
                    residual=residual,
                    context={"tol": cfg.tol, "max_iter": cfg.max_iter},
                )
            y[:-1] = sol
        x = (a - G @ y) / p
        return x, y

    def multipliers(
        self, gamma: np.ndarray, a: np.ndarray, b: np.ndarray, gauge: str | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """``(alpha, beta)`` with ``alpha * r + gamma @ beta = a`` and
        ``beta * c + gamma.T @ alpha = b``, where ``r, c`` are the row and column
        sums of ``gamma`` (equal to the marginals on the manifold)."""
        r, c = gamma.sum(axis=1), gamma.sum(axis=0)
        if (gauge or self.projection.gauge) == "beta":
            return self._solve_reduced(gamma, r, c, a, b)
        beta, alpha = self._solve_reduced(gamma.T, c, r, b, a)
        return alpha, beta

    def project(self, gamma: np.ndarray, Z: np.ndarray, gauge: str | None = None) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        self._check_shape(gamma, Z)
        Z = self._restrict(Z)
        alpha, beta = self.multipliers(gamma, Z.sum(axis=1), Z.sum(axis=0), gauge)
        return Z - (alpha[:, None] + beta[None, :]) * gamma

    project_tangent = project

    # -- retraction -------------------------------------------------------

    def retract(
        self, gamma: np.ndarray, xi: np.ndarray, cfg: SinkhornConfig | None = None
    ) -> np.ndarray:
        """``Sinkhorn(gamma * exp(xi / gamma))`` rebalanced to ``(mu1, mu2)``."""
        cfg = cfg or self.sinkhorn
        log_kernel = self.retraction_log_kernel(gamma, xi, cfg)
        if not cfg.log_domain:
            plan = sinkhorn_scale(np.exp(log_kernel), self.mu1, self.mu2, cfg).plan
        else:
            plan = sinkhorn_scale_log(log_kernel, self.mu1, self.mu2, cfg).plan
        return self.check_interior(plan)

    def check_interior(self, plan: np.ndarray) -> np.ndarray:
        """Reject a retraction whose result underflowed to zero on the support."""
        on_support = plan if self.support is None else plan[self.mask]
        if on_support.size and not on_support.min() > 0:
            raise RetractionOverflowException(
                "retraction underflowed to a boundary coupling", exponent=-np.inf
            )
        return plan

    def retraction_log_kernel(
        self, gamma: np.ndarray, xi: np.ndarray, cfg: SinkhornConfig | None = None
    ) -> np.ndarray:
        """``log(gamma) + xi / gamma`` with ``-inf`` off the support; guards the exponent cap."""
        cfg = cfg or self.sinkhorn
        self._check_shape(gamma, xi)
        ratio = self._ratio(xi, gamma)
        peak = float(ratio.max()) if ratio.size else 0.0
        if not peak <= cfg.exp_cap:
            raise RetractionOverflowException(
                f"retraction exponent {peak:.3g} exceeds the cap {cfg.exp_cap:g}",
                exponent=peak,
            )
        with np.errstate(divide="ignore"):
            log_kernel = np.log(gamma) + ratio
        if self.support is not None:
            log_kernel = np.where(self.mask, log_kernel, -np.inf)
        return log_kernel

    # -- derivatives ------------------------------------------------------

    def egrad_to_rgrad(self, gamma: np.ndarray, egrad: np.ndarray) -> np.ndarray:
        return self.project(gamma, gamma * egrad)

    def dgrad(
        self,
        gamma: np.ndarray,
        egrad: np.ndarray,
        ehess_xi: np.ndarray,
        xi: np.ndarray,
        normal_part: bool = True,
    ) -> np.ndarray:
        """Directional derivative of ``egrad_to_rgrad`` along the tangent ``xi``.

        With ``Z = gamma * egrad`` and ``grad = Z - (alpha 1' + 1 beta') * gamma``,
        differentiating the multiplier system along ``xi`` gives a system with the
        same operator for ``(d_alpha, d_beta)``::

            d_alpha * r + gamma @ d_beta   = dZ.sum(1) - xi @ beta
            d_beta * c + gamma.T @ d_alpha = dZ.sum(0) - xi.T @ alpha

        where ``dZ = xi * egrad + gamma * ehess_xi`` (the row and column sums
        ``r, c`` of ``gamma`` do not move along a tangent direction). Then
        ``D grad[xi] = dZ - (d_alpha 1' + 1 d_beta') * gamma - (alpha 1' + 1 beta') * xi``.

        The ``(d_alpha, d_beta)`` term lies in the normal space; ``normal_part=False``
        skips its solve for callers that project the result.
        """
        self._check_shape(gamma, egrad, ehess_xi, xi)
        xi = self._restrict(xi)
        Z = self._restrict(gamma * egrad)
        alpha, beta = self.multipliers(gamma, Z.sum(axis=1), Z.sum(axis=0))
        Z_dot = self._restrict(xi * egrad + gamma * ehess_xi)
        out = Z_dot - (alpha[:, None] + beta[None, :]) * xi
        if normal_part:
            alpha_dot, beta_dot = self.multipliers(
                gamma, Z_dot.sum(axis=1) - xi @ beta, Z_dot.sum(axis=0) - xi.T @ alpha
            )
            out = out - (alpha_dot[:, None] + beta_dot[None, :]) * gamma
        return out

    def ehess_to_rhess(
        self, gamma: np.ndarray, egrad: np.ndarray, ehess_xi: np.ndarray, xi: np.ndarray
    ) -> np.ndarray:
        """``Proj(D grad f[xi] - grad f * xi / (2 gamma))``."""
        grad = self.egrad_to_rgrad(gamma, egrad)
        d_grad = self.dgrad(gamma, egrad, ehess_xi, xi, normal_part=False)
        return self.project(gamma, d_grad - 0.5 * grad * self._ratio(xi, gamma))

    # -- points and vectors -----------------------------------------------

    def product_coupling(self) -> np.ndarray:
        """``mu1 mu2'``; on a masked manifold, the Sinkhorn scaling of the mask."""
        if self.support is None:
            return np.outer(self.mu1.weights, self.mu2.weights)
        log_kernel = np.where(self.mask, 0.0, -np.inf)
        return sinkhorn_scale_log(log_kernel, self.mu1, self.mu2, self.sinkhorn).plan

    def random_point(self, rng: np.random.Generator, scale: float = 0.1) -> np.ndarray:
        """Sinkhorn scaling of ``exp(scale * N(0, 1))``; deterministic given ``rng``'s state."""
        log_kernel = scale * rng.standard_normal(self.shape)
        if self.support is not None:
            log_kernel = np.where(self.mask, log_kernel, -np.inf)
        return sinkhorn_scale_log(log_kernel, self.mu1, self.mu2, self.sinkhorn).plan

    def random_tangent(self, gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.project(gamma, rng.standard_normal(self.shape))

    def zero_vector(self, gamma: np.ndarray) -> np.ndarray:
        return np.zeros(self.shape)

    def lincomb(self, a: float, xi: np.ndarray, b: float = 0.0, eta: np.ndarray | None = None):
        return a * xi if eta is None else a * xi + b * eta

    def point_residual(self, gamma: np.ndarray) -> float:
        gamma = np.asarray(gamma, dtype=float)
        if gamma.shape != self.shape or not np.all(np.isfinite(gamma)):
            return np.inf
        if self.support is None:
            if np.any(gamma <= 0):
                return np.inf
        elif np.any(gamma[self.mask] <= 0) or np.any(gamma[~self.mask] != 0):
            return np.inf
        return marginal_residual(gamma, self.mu1.weights, self.mu2.weights)

    def tangent_residual(self, xi: np.ndarray) -> float:
        off = 0.0 if self.support is None else float(np.abs(xi[~self.mask]).max(initial=0.0))
        return max(float(np.abs(xi.sum(axis=1)).max()), float(np.abs(xi.sum(axis=0)).max()), off)
