"""Monotonic simulation clocks.

All runtime code reads and sleeps in *simulated* nanoseconds. The wall clock
maps simulated time onto the host's monotonic clock through a compression
factor; the virtual clock is advanced explicitly by the deterministic engine
(or directly, when no engine is attached, so device models work standalone).
"""

from __future__ import annotations

import threading
import time
from typing import Protocol


class SimClock(Protocol):
    def now_ns(self) -> int: ...
    def now_ms(self) -> float: ...
    def now_s(self) -> float: ...
    def sleep_ns(self, duration_ns: int) -> None: ...
    def sleep_until_ns(self, t_ns: int) -> None: ...


class WallClock:
    """Simulated time derived from time.monotonic_ns().

    `time_scale` simulated seconds elapse per wall second; sleeps are scaled
    down accordingly. Resolution is the host timer's (well below 1 us).
    """

    def __init__(self, time_scale: float = 1.0):
        if time_scale <= 0:
            raise ValueError("time_scale must be positive")
        self.time_scale = time_scale
        self._epoch = time.monotonic_ns()

    def start(self) -> None:
        """Re-anchor simulated t=0 at the present instant."""
        self._epoch = time.monotonic_ns()

    def now_ns(self) -> int:
        return int((time.monotonic_ns() - self._epoch) * self.time_scale)

    def now_ms(self) -> float:
        return self.now_ns() / 1e6

    def now_s(self) -> float:
        return self.now_ns() / 1e9

    def sleep_ns(self, duration_ns: int) -> None:
        if duration_ns > 0:
            time.sleep(duration_ns / self.time_scale / 1e9)

    def sleep_until_ns(self, t_ns: int) -> None:
        self.sleep_ns(t_ns - self.now_ns())

    def interruptible_sleep_until_ns(
        self, t_ns: int, stop: threading.Event, chunk_wall_s: float = 0.05
    ) -> bool:
        """Sleep toward simulated `t_ns`, waking early if `stop` is set.

        Returns False when interrupted. Chunked so a shutdown request is
        honored within ~chunk_wall_s even across long task periods.
        """
        while True:
            remaining_ns = t_ns - self.now_ns()
            if remaining_ns <= 0:
                return True
            if stop.is_set():
                return False
            wall_s = remaining_ns / self.time_scale / 1e9
            time.sleep(min(wall_s, chunk_wall_s))


class VirtualClock:
    """Engine-driven virtual time.

    Inside a deterministic run, sleeping hands control back to the engine,
    which advances time and resumes the caller; outside a run, sleeping
    simply advances the counter so device latencies still accumulate.
    """

    def __init__(self) -> None:
        self._now_ns = 0
        self._engine = None  # set by the deterministic engine while running

    def attach_engine(self, engine) -> None:
        self._engine = engine

    def detach_engine(self) -> None:
        self._engine = None

    def advance_to(self, t_ns: int) -> None:
        if t_ns < self._now_ns:
            raise ValueError("virtual time cannot move backwards")
        self._now_ns = t_ns

    def now_ns(self) -> int:
        return self._now_ns

    def now_ms(self) -> float:
        return self._now_ns / 1e6

    def now_s(self) -> float:
        return self._now_ns / 1e9

    def sleep_ns(self, duration_ns: int) -> None:
        if duration_ns <= 0:
            return
        engine = self._engine
        if engine is not None and engine.in_task():
            engine.task_sleep_ns(duration_ns)
        else:
            self._now_ns += duration_ns

    def sleep_until_ns(self, t_ns: int) -> None:
        self.sleep_ns(t_ns - self._now_ns)
