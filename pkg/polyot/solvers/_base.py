from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Literal

import numpy as np
import pydantic
from loguru import logger

from .._base import BaseModel, FrozenModel
from ..exceptions import ConfigException, InvariantViolationException, ValidationException
from ..manifold import CouplingManifold, ProductManifold, as_product
from ..objectives import Objective
from ..utils import SeedLike, Stopwatch, as_generator, get_current_time_formatted
from .listener import SolverBatchListener, SolverListener

POINT_TOL = 1e-8


class ArmijoConfig(FrozenModel):
    initial_step: float = 1.0
    contraction: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 30

    @pydantic.model_validator(mode="after")
    def _check(self):
        if not (
            self.initial_step > 0
            and 0 < self.contraction < 1
            and 0 < self.sufficient_decrease < 0.5
            and self.max_backtracks >= 1
        ):
            raise ConfigException(
                "armijo needs initial_step > 0, contraction in (0, 1), "
                "sufficient_decrease in (0, 0.5) and max_backtracks >= 1",
                self.model_dump(),
            )
        return self


class TrustRegionConfig(FrozenModel):
    initial_radius: float = 1.0
    max_radius: float = 100.0
    inner_tol: float = 0.1
    """kappa of the truncated-CG stopping rule ``|r| <= |r0| * min(|r0|^theta, kappa)``"""
    theta: float = 1.0
    accept_ratio: float = 0.1
    max_inner_iter: int | None = None
    """defaults to the dimension of the tangent space"""
    max_rejections: int = 30

    @pydantic.model_validator(mode="after")
    def _check(self):
        if not (
            0 < self.initial_radius <= self.max_radius
            and self.inner_tol > 0
            and self.theta > 0
            and 0 <= self.accept_ratio < 0.25
            and self.max_rejections >= 1
            and (self.max_inner_iter is None or self.max_inner_iter >= 1)
        ):
            raise ConfigException("invalid trust-region configuration", self.model_dump())
        return self


class SolverConfig(FrozenModel):
    max_iter: int = 500
    max_time_sec: float | None = None
    grad_tol: float = 1e-6
    armijo: ArmijoConfig = ArmijoConfig()
    cg_variant: Literal["HS", "FR"] = "HS"
    tr: TrustRegionConfig = TrustRegionConfig()
    check_invariants: bool = True
    """verify marginals and monotone cost at every accepted iterate"""

    @pydantic.model_validator(mode="after")
    def _check(self):
        if self.max_iter < 0 or not self.grad_tol > 0:
            raise ConfigException(
                "max_iter must be >= 0 and grad_tol positive",
                {"max_iter": self.max_iter, "grad_tol": self.grad_tol},
            )
        if self.max_time_sec is not None and not self.max_time_sec > 0:
            raise ConfigException("max_time_sec must be positive", {"max_time_sec": self.max_time_sec})
        return self


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration-cap"
    TIME_CAP = "time-cap"
    STEP_FAILURE = "step-failure"


class TraceRecord(FrozenModel):
    iter: int
    elapsed: float
    cost: float
    grad_norm: float | None = None
    step_size: float | None = None


class SolveResult(BaseModel):
    point: tuple[np.ndarray, ...]
    trace: list[TraceRecord]
    status: SolveStatus
    solver: str
    created_at: str = pydantic.Field(default_factory=get_current_time_formatted)

    @property
    def plan(self) -> np.ndarray:
        """The single coupling of an arity-1 solve."""
        if len(self.point) != 1:
            raise ValidationException(f"result holds {len(self.point)} couplings, use .point")
        return self.point[0]

    @property
    def cost(self) -> float:
        return self.trace[-1].cost

    @property
    def n_iter(self) -> int:
        return self.trace[-1].iter

    def summary(self) -> dict[str, Any]:
        last = self.trace[-1]
        return {
            "solver": self.solver,
            "status": self.status.value,
            "cost": last.cost,
            "grad_norm": last.grad_norm,
            "n_iter": last.iter,
            "elapsed_sec": last.elapsed,
            "created_at": self.created_at,
        }


@dataclass
class Iterate:
    point: tuple
    cost: float
    egrad: tuple
    grad: tuple
    grad_norm: float


class Problem:
    """An objective on a product manifold, with the derivative plumbing solvers share."""

    def __init__(self, manifold: CouplingManifold | ProductManifold, objective: Objective):
        self.manifold = as_product(manifold)
        self.objective = objective
        objective.check_shapes(self.manifold.shapes)

    def point(self, x0) -> tuple:
        if isinstance(x0, np.ndarray):
            x0 = (x0,)
        x0 = tuple(np.asarray(x, dtype=float) for x in x0)
        residual = self.manifold.point_residual(x0)
        if not residual <= POINT_TOL:
            raise ValidationException(
                "initial point is not a strictly positive coupling with the required marginals",
                {"residual": residual},
            )
        return x0

    def cost(self, point) -> float:
        return self.objective.cost(point)

    def evaluate(self, point, cost: float | None = None) -> Iterate:
        cost = self.cost(point) if cost is None else cost
        egrad = self.objective.egrad(point)
        grad = self.manifold.egrad_to_rgrad(point, egrad)
        return Iterate(point, cost, egrad, grad, self.manifold.norm(point, grad))

    def hess(self, it: Iterate, xi) -> tuple:
        return self.manifold.ehess_to_rhess(it.point, it.egrad, self.objective.ehess(it.point, xi), xi)


@dataclass
class Step:
    iterate: Iterate
    size: float


@dataclass
class SolveContext:
    """Per-solve mutable state, so one solver instance can serve concurrent solves."""

    problem: Problem
    memory: dict = field(default_factory=dict)


class BaseSolver:
    name = "base"
    monotone = True

    def __init__(
        self,
        cfg: SolverConfig | None = None,
        listeners: SolverListener | list[SolverListener] | None = None,
    ):
        self.cfg = cfg or SolverConfig()
        if isinstance(listeners, SolverListener):
            listeners = [listeners]
        self.listener = SolverBatchListener(list(listeners or []))

    def _check_problem(self, problem: Problem):
        pass

    def _step(self, ctx: SolveContext, it: Iterate) -> Step | None:
        """Advance one accepted iterate, or ``None`` when no acceptable step exists."""
        raise NotImplementedError

    def _check_step(self, problem: Problem, old: Iterate, new: Iterate):
        residual = problem.manifold.point_residual(new.point)
        if not residual <= POINT_TOL:
            raise InvariantViolationException(
                "accepted iterate left the manifold", {"residual": residual}
            )
        if self.monotone and not new.cost <= old.cost:
            raise InvariantViolationException(
                "accepted step increased the cost", {"before": old.cost, "after": new.cost}
            )

    def solve(
        self,
        manifold: CouplingManifold | ProductManifold,
        objective: Objective,
        x0=None,
        seed: SeedLike = None,
    ) -> SolveResult:
        problem = Problem(manifold, objective)
        self._check_problem(problem)
        if x0 is None:
            x0 = problem.manifold.random_point(as_generator(seed))
        x0 = problem.point(x0)
        cfg = self.cfg
        ctx = SolveContext(problem)

        logger.info(f"{self.name}: solving {objective.name} on {problem.manifold!r}")
        clock = Stopwatch()
        it = problem.evaluate(x0)
        trace = [TraceRecord(iter=0, elapsed=clock.elapsed(), cost=it.cost, grad_norm=it.grad_norm)]
        self.listener.on_solve_start(self, problem, it)

        while True:
            k = trace[-1].iter
            if it.grad_norm <= cfg.grad_tol:
                status = SolveStatus.CONVERGED
                break
            if k >= cfg.max_iter:
                status = SolveStatus.ITERATION_CAP
                break
            if cfg.max_time_sec is not None and trace[-1].elapsed >= cfg.max_time_sec:
                status = SolveStatus.TIME_CAP
                break
            step = self._step(ctx, it)
            if step is None:
                status = SolveStatus.STEP_FAILURE
                break
            if cfg.check_invariants:
                self._check_step(problem, it, step.iterate)
            it = step.iterate
            record = TraceRecord(
                iter=k + 1,
                elapsed=clock.elapsed(),
                cost=it.cost,
                grad_norm=it.grad_norm,
                step_size=step.size,
            )
            trace.append(record)
            logger.debug(
                f"{self.name} it={record.iter} cost={record.cost:.10g} "
                f"|grad|={record.grad_norm:.3e} step={record.step_size:.3e}"
            )
            self.listener.on_iteration(self, record, it)

        result = SolveResult(point=it.point, trace=trace, status=status, solver=self.name)
        logger.info(
            f"{self.name}: {status.value} after {result.n_iter} iterations, cost={result.cost:.10g}"
        )
        self.listener.on_solve_end(self, result)
        return result
