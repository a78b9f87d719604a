from loguru import logger

from ..exceptions import NumericalException
from ._base import ArmijoConfig, Iterate, Problem, Step


class ArmijoLineSearch:
    """Backtracking along a retraction curve until sufficient decrease holds.

    Trial points whose retraction fails (exponent cap, Sinkhorn divergence)
    count as rejected trials and the step keeps shrinking.
    """

    def __init__(self, cfg: ArmijoConfig | None = None):
        self.cfg = cfg or ArmijoConfig()

    def search(self, problem: Problem, it: Iterate, d, df0: float) -> Step | None:
        """Return the accepted step along ``d`` or ``None`` after ``max_backtracks`` rejections.

        ``df0`` is the slope ``g(grad, d)`` and must be negative.
        """
        cfg = self.cfg
        manifold = problem.manifold
        t = cfg.initial_step
        for trial in range(cfg.max_backtracks + 1):
            if trial:
                t *= cfg.contraction
            try:
                candidate = manifold.retract(it.point, manifold.lincomb(t, d))
                cost = problem.cost(candidate)
            except NumericalException as e:
                logger.debug(f"armijo trial t={t:.3e} rejected: {e.msg}")
                continue
            if cost <= it.cost + cfg.sufficient_decrease * t * df0:
                try:
                    return Step(problem.evaluate(candidate, cost), t)
                except NumericalException as e:
                    logger.warning(f"gradient evaluation failed at an accepted point: {e.msg}")
                    return None
        logger.debug(f"armijo: no sufficient decrease after {cfg.max_backtracks} backtracks")
        return None
