from ._base import BaselineRun, FwConfig, StepSchedule
from .coot_am import coot_am, coot_am_half_sweeps, coot_surrogate, entropy_term
from .frank_wolfe import exact_step, frank_wolfe, fw_fixed_step

__all__ = [
    "FwConfig",
    "StepSchedule",
    "BaselineRun",
    "frank_wolfe",
    "fw_fixed_step",
    "exact_step",
    "coot_am",
    "coot_am_half_sweeps",
    "coot_surrogate",
    "entropy_term",
]
