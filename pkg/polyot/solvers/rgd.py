from ._base import BaseSolver, Iterate, SolveContext, Step
from .linesearch import ArmijoLineSearch


class RiemannianGradientDescent(BaseSolver):
    """Steepest descent ``x+ = R(x, -t grad)`` with Armijo backtracking."""

    name = "rgd"

    def _step(self, ctx: SolveContext, it: Iterate) -> Step | None:
        manifold = ctx.problem.manifold
        d = manifold.lincomb(-1.0, it.grad)
        return ArmijoLineSearch(self.cfg.armijo).search(ctx.problem, it, d, -it.grad_norm**2)


def solve_rgd(manifold, objective, x0=None, cfg=None, seed=None, listeners=None):
    return RiemannianGradientDescent(cfg, listeners).solve(manifold, objective, x0, seed)
