from typing import TYPE_CHECKING

from loguru import logger

if TYPE_CHECKING:
    from ._base import BaseSolver, Iterate, Problem, SolveResult, TraceRecord


class SolverListener:
    def on_solve_start(self, solver: "BaseSolver", problem: "Problem", iterate: "Iterate"):
        pass

    def on_iteration(self, solver: "BaseSolver", record: "TraceRecord", iterate: "Iterate"):
        pass

    def on_solve_end(self, solver: "BaseSolver", result: "SolveResult"):
        pass


class SolverBatchListener:
    def __init__(self, listeners: list[SolverListener] | None = None):
        if listeners is None:
            listeners = []
        self.listeners = listeners

    def _on_event_construct(self, event: str):
        def _on_event(*args):
            for listener in self.listeners:
                listener.__getattribute__(event)(*args)

        return _on_event

    def __getattribute__(self, name: str):
        if name.startswith("on_"):
            return self._on_event_construct(name)
        return super().__getattribute__(name)

    def add_listener(self, listener: SolverListener):
        self.listeners.append(listener)

    def remove_listener(self, listener: SolverListener):
        self.listeners.remove(listener)

    def clear_listeners(self):
        self.listeners = []


class ProgressLogger(SolverListener):
    def __init__(self, every: int = 10):
        self.every = every

    def on_iteration(self, solver, record, iterate):
        if record.iter % self.every == 0:
            grad = "-" if record.grad_norm is None else f"{record.grad_norm:.3e}"
            logger.info(
                f"{solver.name} it={record.iter} t={record.elapsed:.2f}s "
                f"cost={record.cost:.10g} |grad|={grad}"
            )


class IterateStore(SolverListener):
    """Keeps every accepted iterate in memory."""

    def __init__(self):
        self.points = []
        self.costs = []
        self.grad_norms = []
        self.records = []

    def on_solve_start(self, solver, problem, iterate):
        self.points = [iterate.point]
        self.costs = [iterate.cost]
        self.grad_norms = [iterate.grad_norm]
        self.records = []

    def on_iteration(self, solver, record, iterate):
        self.points.append(iterate.point)
        self.costs.append(record.cost)
        self.grad_norms.append(record.grad_norm)
        self.records.append(record)
