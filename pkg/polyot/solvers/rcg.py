from loguru import logger

from ._base import BaseSolver, Iterate, SolveContext, Step
from .linesearch import ArmijoLineSearch


class RiemannianConjugateGradient(BaseSolver):
    """Nonlinear conjugate gradients with projection transport.

    ``d+ = -grad+ + beta * T(d)`` where ``T`` projects onto the new tangent
    space and ``beta`` (Hestenes-Stiefel or Fletcher-Reeves) is clipped at 0.
    A direction that is not a descent direction is replaced by ``-grad``.
    """

    name = "rcg"

    def _beta(self, ctx: SolveContext, it: Iterate, d_old) -> float:
        manifold = ctx.problem.manifold
        prev: Iterate = ctx.memory["iterate"]
        if self.cfg.cg_variant == "FR":
            return it.grad_norm**2 / prev.grad_norm**2
        grad_old = manifold.transport(prev.point, it.point, prev.grad)
        y = manifold.lincomb(1.0, it.grad, -1.0, grad_old)
        denom = manifold.metric(it.point, d_old, y)
        if denom == 0:
            return 0.0
        return manifold.metric(it.point, it.grad, y) / denom

    def _direction(self, ctx: SolveContext, it: Iterate):
        manifold = ctx.problem.manifold
        steepest = manifold.lincomb(-1.0, it.grad)
        if "direction" not in ctx.memory:
            return steepest, -it.grad_norm**2, True
        prev: Iterate = ctx.memory["iterate"]
        d_old = manifold.transport(prev.point, it.point, ctx.memory["direction"])
        beta = max(0.0, self._beta(ctx, it, d_old))
        d = manifold.lincomb(1.0, steepest, beta, d_old)
        slope = manifold.metric(it.point, d, it.grad)
        if not slope < 0:
            logger.debug(f"rcg: restart, g(d, grad)={slope:.3e}")
            return steepest, -it.grad_norm**2, True
        return d, slope, False

    def _step(self, ctx: SolveContext, it: Iterate) -> Step | None:
        manifold = ctx.problem.manifold
        search = ArmijoLineSearch(self.cfg.armijo)
        d, slope, steepest = self._direction(ctx, it)
        step = search.search(ctx.problem, it, d, slope)
        if step is None and not steepest:
            logger.debug("rcg: line search failed along the conjugate direction, retrying -grad")
            d, slope = manifold.lincomb(-1.0, it.grad), -it.grad_norm**2
            step = search.search(ctx.problem, it, d, slope)
        if step is not None:
            ctx.memory["iterate"] = it
            ctx.memory["direction"] = d
        return step


def solve_rcg(manifold, objective, x0=None, cfg=None, seed=None, listeners=None):
    return RiemannianConjugateGradient(cfg, listeners).solve(manifold, objective, x0, seed)
