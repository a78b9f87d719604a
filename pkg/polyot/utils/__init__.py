from .random import SeedLike, as_generator, sample_simplex
from .time import Stopwatch, get_current_time_formatted

__all__ = [
    "get_current_time_formatted",
    "Stopwatch",
    "SeedLike",
    "as_generator",
    "sample_simplex",
]
