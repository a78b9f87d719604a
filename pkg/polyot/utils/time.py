import time

import arrow


def get_current_time_formatted(format: str | None = None, tz: str | None = None) -> str:
    if format is None:
        format = "YYYY-MM-DDTHH:mm:ssZZ"
    if tz is None:
        tz = "UTC"
    return arrow.now(tz).format(format)


class Stopwatch:
    """Monotonic elapsed-time counter for solver traces.

    Successive readings are forced to be strictly increasing, so two trace
    records never share a timestamp even on coarse clocks.
    """

    def __init__(self) -> None:
        self._start = time.perf_counter()
        self._last = 0.0

    def elapsed(self) -> float:
        now = time.perf_counter() - self._start
        if now <= self._last:
            now = self._last + 1e-9
        self._last = now
        return now
