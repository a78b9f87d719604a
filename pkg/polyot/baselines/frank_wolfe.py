import numpy as np
from loguru import logger

from ..exceptions import ValidationException
from ..manifold import make_manifold
from ..marginal import MarginalLike
from ..objectives import Objective
from ..sinkhorn import entropic_lmo
from ..solvers import SolveResult, SolverListener, SolveStatus
from ._base import BaselineRun, FwConfig


def exact_step(
    objective: Objective, gamma: np.ndarray, egrad: np.ndarray, direction: np.ndarray
) -> float:
    """Minimizer over ``[0, 1]`` of ``f(gamma + s * direction)`` for a quadratic ``f``."""
    slope = float(np.sum(egrad * direction))
    curvature = 0.5 * float(np.sum(direction * objective.ehess(gamma, direction)[0]))
    if curvature > 0:
        return float(np.clip(-slope / (2.0 * curvature), 0.0, 1.0))
    return 1.0 if slope + curvature < 0 else 0.0


def frank_wolfe(
    objective: Objective,
    mu1: MarginalLike,
    mu2: MarginalLike,
    x0: np.ndarray | None = None,
    cfg: FwConfig | None = None,
    listeners: SolverListener | list | None = None,
) -> SolveResult:
    """Frank-Wolfe over the transport polytope with the entropic oracle.

    Each iteration moves towards ``entropic_lmo(egrad, mu1, mu2, epsilon)``.
    The reported cost is the objective itself; entropy only enters the oracle.
    With ``steps="fixed-1"`` the iterate is replaced by the oracle output and
    no gradient norm or step size is reported.
    """
    cfg = cfg or FwConfig()
    if objective.arity != 1:
        raise ValidationException(
            "frank-wolfe takes a single-coupling objective", {"arity": objective.arity}
        )
    manifold = make_manifold(mu1, mu2, cfg.sinkhorn)
    objective.check_shapes([manifold.shape])
    fixed = cfg.steps == "fixed-1"
    schedule = cfg.steps
    if schedule == "exact" and not (objective.is_quadratic and objective.has_hessian):
        logger.warning(
            f"exact line search needs a quadratic objective, {objective.name} is not; using 2/(t+2)"
        )
        schedule = "open-loop"

    gamma = manifold.product_coupling() if x0 is None else np.asarray(x0, dtype=float)
    run = BaselineRun("fw1" if fixed else "fw", cfg, listeners)
    run.check_point(manifold, gamma)

    def grad_norm(g, e):
        return None if fixed else manifold.norm(g, manifold.egrad_to_rgrad(g, e))

    egrad = objective.egrad(gamma)[0]
    run.start((gamma,), objective.cost(gamma), grad_norm(gamma, egrad))
    while True:
        status = run.out_of_budget()
        if status is not None:
            break
        t = run.trace[-1].iter
        target = entropic_lmo(egrad, manifold.mu1, manifold.mu2, cfg.epsilon, cfg.sinkhorn)
        direction = target - gamma
        if schedule == "fixed-1":
            step = 1.0
        elif schedule == "open-loop":
            step = 2.0 / (t + 2.0)
        else:
            step = exact_step(objective, gamma, egrad, direction)
        new = target if step == 1.0 else gamma + step * direction
        run.check_point(manifold, new)
        moved = float(np.abs(new - gamma).max())
        gamma = new
        egrad = objective.egrad(gamma)[0]
        run.record((gamma,), objective.cost(gamma), grad_norm(gamma, egrad), None if fixed else step)
        if moved <= cfg.move_tol:
            status = SolveStatus.CONVERGED
            break
    return run.finish((gamma,), status)


def fw_fixed_step(
    objective: Objective,
    mu1: MarginalLike,
    mu2: MarginalLike,
    x0: np.ndarray | None = None,
    cfg: FwConfig | None = None,
    listeners: SolverListener | list | None = None,
) -> SolveResult:
    """Frank-Wolfe with unit steps: ``gamma <- entropic_lmo(egrad(gamma))`` until it stops moving."""
    cfg = (cfg or FwConfig()).model_copy(update={"steps": "fixed-1"})
    return frank_wolfe(objective, mu1, mu2, x0, cfg, listeners)
