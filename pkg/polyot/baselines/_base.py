from typing import Literal

import numpy as np
import pydantic
from loguru import logger

from .._base import FrozenModel
from ..exceptions import ConfigException, InvariantViolationException
from ..sinkhorn import SinkhornConfig
from ..solvers import (
    Iterate,
    SolveResult,
    SolverBatchListener,
    SolverListener,
    SolveStatus,
    TraceRecord,
)
from ..utils import Stopwatch

StepSchedule = Literal["open-loop", "fixed-1", "exact"]


class FwConfig(FrozenModel):
    epsilon: float = 1e-2
    """entropic regularization of the linear minimization oracle"""
    steps: StepSchedule = "open-loop"
    """``open-loop`` is ``2 / (t + 2)``; ``exact`` minimizes quadratic objectives along the segment"""
    max_iter: int = 500
    max_time_sec: float | None = None
    move_tol: float = 1e-10
    """stop once an iteration moves no entry by more than this"""
    sinkhorn: SinkhornConfig = SinkhornConfig()

    @pydantic.model_validator(mode="after")
    def _check(self):
        if not self.epsilon > 0:
            raise ConfigException("epsilon must be positive", {"epsilon": self.epsilon})
        if self.max_iter < 0 or not self.move_tol >= 0:
            raise ConfigException(
                "max_iter and move_tol must be nonnegative",
                {"max_iter": self.max_iter, "move_tol": self.move_tol},
            )
        if self.max_time_sec is not None and not self.max_time_sec > 0:
            raise ConfigException("max_time_sec must be positive", {"max_time_sec": self.max_time_sec})
        return self


def max_move(old: tuple, new: tuple) -> float:
    return max(float(np.abs(a - b).max()) for a, b in zip(old, new))


class BaselineRun:
    """Trace bookkeeping shared by the projection-free baselines."""

    def __init__(self, name: str, cfg: FwConfig, listeners: SolverListener | list | None = None):
        if isinstance(listeners, SolverListener):
            listeners = [listeners]
        self.name = name
        self.cfg = cfg
        self.listener = SolverBatchListener(list(listeners or []))
        self.clock = Stopwatch()
        self.trace: list[TraceRecord] = []

    def start(self, point: tuple, cost: float, grad_norm: float | None = None):
        logger.info(f"{self.name}: starting, cost={cost:.10g}")
        self.trace.append(
            TraceRecord(iter=0, elapsed=self.clock.elapsed(), cost=cost, grad_norm=grad_norm)
        )
        self.listener.on_solve_start(self, None, Iterate(point, cost, None, None, grad_norm))

    def record(self, point: tuple, cost: float, grad_norm=None, step_size=None):
        record = TraceRecord(
            iter=self.trace[-1].iter + 1,
            elapsed=self.clock.elapsed(),
            cost=cost,
            grad_norm=grad_norm,
            step_size=step_size,
        )
        self.trace.append(record)
        logger.debug(f"{self.name} it={record.iter} cost={cost:.10g}")
        self.listener.on_iteration(self, record, Iterate(point, cost, None, None, grad_norm))

    def out_of_budget(self) -> SolveStatus | None:
        if self.trace[-1].iter >= self.cfg.max_iter:
            return SolveStatus.ITERATION_CAP
        if self.cfg.max_time_sec is not None and self.trace[-1].elapsed >= self.cfg.max_time_sec:
            return SolveStatus.TIME_CAP
        return None

    def check_point(self, manifold, point: np.ndarray):
        residual = manifold.point_residual(point)
        if not residual <= 1e-8:
            raise InvariantViolationException(
                f"{self.name} iterate is not a coupling", {"residual": residual}
            )

    def finish(self, point: tuple, status: SolveStatus) -> SolveResult:
        result = SolveResult(point=point, trace=self.trace, status=status, solver=self.name)
        logger.info(
            f"{self.name}: {status.value} after {result.n_iter} iterations, cost={result.cost:.10g}"
        )
        self.listener.on_solve_end(self, result)
        return result
