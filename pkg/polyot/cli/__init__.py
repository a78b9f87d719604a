from .generate import generate_problem, write_problem
from .io import read_marginal, read_mask, read_matrix, read_trace, write_summary, write_trace
from .main import ExperimentSpec, load_problem, main, run_experiment

__all__ = [
    "ExperimentSpec",
    "load_problem",
    "run_experiment",
    "main",
    "generate_problem",
    "write_problem",
    "read_matrix",
    "read_marginal",
    "read_mask",
    "read_trace",
    "write_trace",
    "write_summary",
]
