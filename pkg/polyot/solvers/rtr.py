from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..exceptions import ConfigException, NumericalException
from ._base import BaseSolver, Iterate, Problem, SolveContext, Step, TrustRegionConfig


@dataclass
class InnerResult:
    eta: tuple
    Heta: tuple
    hit_boundary: bool
    n_iter: int


def _boundary_tau(e_e: float, e_d: float, d_d: float, radius: float) -> float:
    """Positive root of ``|eta + tau d|^2 = radius^2``."""
    disc = e_d**2 + d_d * (radius**2 - e_e)
    return (-e_d + np.sqrt(max(disc, 0.0))) / d_d


def truncated_cg(problem: Problem, it: Iterate, radius: float, cfg: TrustRegionConfig) -> InnerResult:
    """Steihaug-Toint truncated conjugate gradients on the quadratic model at ``it``."""
    M = problem.manifold
    x = it.point
    max_inner = cfg.max_inner_iter or max(M.dim, 1)
    eta = M.zero_vector(x)
    Heta = M.zero_vector(x)
    r = it.grad
    r_r = it.grad_norm**2
    norm_r0 = it.grad_norm
    d = M.lincomb(-1.0, r)
    e_e, e_d, d_d = 0.0, 0.0, r_r
    for j in range(max_inner):
        Hd = problem.hess(it, d)
        dHd = M.metric(x, d, Hd)
        alpha = r_r / dHd if dHd > 0 else np.inf
        e_e_new = e_e + 2 * alpha * e_d + alpha**2 * d_d
        if dHd <= 0 or e_e_new >= radius**2:
            tau = _boundary_tau(e_e, e_d, d_d, radius)
            eta = M.lincomb(1.0, eta, tau, d)
            Heta = M.lincomb(1.0, Heta, tau, Hd)
            return InnerResult(eta, Heta, True, j + 1)
        eta = M.lincomb(1.0, eta, alpha, d)
        Heta = M.lincomb(1.0, Heta, alpha, Hd)
        e_e = e_e_new
        r = M.project(x, M.lincomb(1.0, r, alpha, Hd))
        r_r_new = M.metric(x, r, r)
        if np.sqrt(r_r_new) <= norm_r0 * min(norm_r0**cfg.theta, cfg.inner_tol):
            return InnerResult(eta, Heta, False, j + 1)
        beta = r_r_new / r_r
        d = M.lincomb(-1.0, r, beta, d)
        e_d = beta * (e_d + alpha * d_d)
        d_d = r_r_new + beta**2 * d_d
        r_r = r_r_new
    return InnerResult(eta, Heta, False, max_inner)


def cauchy_point(problem: Problem, it: Iterate, radius: float) -> InnerResult:
    """Model minimizer along ``-grad`` inside the trust region."""
    M = problem.manifold
    Hg = problem.hess(it, it.grad)
    gHg = M.metric(it.point, it.grad, Hg)
    g3 = it.grad_norm**3
    tau = 1.0 if gHg <= 0 else min(g3 / (radius * gHg), 1.0)
    scale = -tau * radius / it.grad_norm
    return InnerResult(M.lincomb(scale, it.grad), M.lincomb(scale, Hg), tau == 1.0, 1)


class RiemannianTrustRegion(BaseSolver):
    """Trust-region method on the second-order model ``f + g(grad, eta) + g(Hess eta, eta) / 2``.

    A step is accepted when the ratio of actual to predicted decrease exceeds
    ``accept_ratio``; rejected proposals shrink the radius inside the same
    iteration, so every trace record is an accepted iterate.
    """

    name = "rtr"

    def _check_problem(self, problem: Problem):
        if not problem.objective.has_hessian:
            raise ConfigException(
                f"rtr needs a Hessian-vector product, {problem.objective.name} has none",
                {"objective": problem.objective.name},
            )

    def _model_decrease(self, problem: Problem, it: Iterate, inner: InnerResult) -> float:
        M = problem.manifold
        return -(
            M.metric(it.point, it.grad, inner.eta)
            + 0.5 * M.metric(it.point, inner.Heta, inner.eta)
        )

    def _step(self, ctx: SolveContext, it: Iterate) -> Step | None:
        problem = ctx.problem
        cfg = self.cfg.tr
        M = problem.manifold
        radius = ctx.memory.get("radius", cfg.initial_radius)
        for _ in range(cfg.max_rejections):
            inner = truncated_cg(problem, it, radius, cfg)
            decrease = self._model_decrease(problem, it, inner)
            if not decrease > 0:
                logger.warning("rtr: inner solver produced no model decrease, using the Cauchy point")
                inner = cauchy_point(problem, it, radius)
                decrease = self._model_decrease(problem, it, inner)
            try:
                candidate = M.retract(it.point, inner.eta)
                cost = problem.cost(candidate)
            except NumericalException as e:
                logger.debug(f"rtr: retraction rejected at radius {radius:.3e}: {e.msg}")
                radius *= 0.25
                continue
            reg = 1e3 * np.finfo(float).eps * max(1.0, abs(it.cost))
            rho = (it.cost - cost + reg) / (decrease + reg)
            if rho < 0.25:
                radius *= 0.25
            elif rho > 0.75 and inner.hit_boundary:
                radius = min(2.0 * radius, cfg.max_radius)
            if rho > cfg.accept_ratio and cost <= it.cost:
                ctx.memory["radius"] = radius
                try:
                    new = problem.evaluate(candidate, cost)
                except NumericalException as e:
                    logger.warning(f"rtr: gradient evaluation failed at an accepted point: {e.msg}")
                    return None
                logger.debug(
                    f"rtr: accepted rho={rho:.3f} inner={inner.n_iter} radius={radius:.3e}"
                )
                return Step(new, M.norm(it.point, inner.eta))
            logger.debug(f"rtr: rejected rho={rho:.3f}, radius -> {radius:.3e}")
        ctx.memory["radius"] = radius
        return None


def solve_rtr(manifold, objective, x0=None, cfg=None, seed=None, listeners=None):
    return RiemannianTrustRegion(cfg, listeners).solve(manifold, objective, x0, seed)
