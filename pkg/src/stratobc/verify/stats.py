"""Statistical metrics used to judge runs.

Activation drift: for a periodic record stream, the ideal record time of
entry n is the first actual record time plus n periods; the drift of entry
n is the absolute difference between ideal and actual. Percentage error and
mean squared error compare theoretical against actual measurement values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from stratobc.executor.records import ActivationLog


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class DriftStats:
    task: str
    avg_drift_s: float
    max_drift_s: float
    n: int


@dataclass(frozen=True)
class ErrorStats:
    errors_pct: tuple[float, ...]
    mse: float


def drift_stats(actual_times_s: Sequence[float], period_s: float,
                task: str = "") -> DriftStats:
    """Drift statistics over a periodic record-time series (seconds)."""
    if len(actual_times_s) < 2:
        raise StatsError("drift analysis needs at least two record times")
    if period_s <= 0:
        raise StatsError("period must be positive")
    first = actual_times_s[0]
    drifts = [abs((first + n * period_s) - ar) for n, ar in enumerate(actual_times_s)]
    return DriftStats(
        task=task,
        avg_drift_s=sum(drifts) / len(drifts),
        max_drift_s=max(drifts),
        n=len(drifts),
    )


def drift_stats_from_log(log: ActivationLog, period_s: float) -> DriftStats:
    times = [r.actual_ms / 1e3 for r in log.records()]
    return drift_stats(times, period_s, task=log.task)


def drift_stats_from_csv(path: Path, period_s: float, task: str | None = None) -> DriftStats:
    log = ActivationLog.read_csv(path, task)
    times = [r.actual_ms / 1e3 for r in log.records()]
    return drift_stats(times, period_s, task=task or log.task)


def pct_error(tv: float, av: float) -> float:
    """Absolute percentage error of actual value `av` against theoretical
    `tv`; `tv` stays in the denominator no matter how small."""
    if tv == 0:
        raise StatsError("percentage error is undefined for a zero theoretical value")
    return abs(tv - av) / abs(tv) * 100.0


def mse(pairs: Iterable[tuple[float, float]]) -> float:
    pairs = list(pairs)
    if not pairs:
        raise StatsError("MSE needs at least one (theoretical, actual) pair")
    return sum((tv - av) ** 2 for tv, av in pairs) / len(pairs)


def error_stats(pairs: Iterable[tuple[float, float]]) -> ErrorStats:
    pairs = list(pairs)
    return ErrorStats(
        errors_pct=tuple(pct_error(tv, av) for tv, av in pairs),
        mse=mse(pairs),
    )
