"""Activation records, per-task logs and the scheduling trace."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator


@dataclass(frozen=True)
class ActivationRecord:
    """One task activation.

    `theoretical_ms` is the ideal record instant (first actual + n * period
    for cyclic tasks); `drift_ms` its signed distance from the actual one.
    """

    task: str
    n: int
    theoretical_ms: float
    actual_ms: float
    deadline_met: bool

    @property
    def drift_ms(self) -> float:
        return self.theoretical_ms - self.actual_ms


class ActivationLog:
    """Compact per-task activation history.

    Stores parallel primitive arrays (a long run logs millions of cycles);
    aggregate statistics are maintained incrementally so `records_enabled`
    can be switched off for huge runs without losing the stats.
    """

    CSV_HEADER = "n,theoretical_ms,actual_ms,drift_ms,deadline_met"

    def __init__(self, task: str, records_enabled: bool = True):
        self.task = task
        self.records_enabled = records_enabled
        self._tr_ns: list[int] = []
        self._ar_ns: list[int] = []
        self._met: list[bool] = []
        self.count = 0
        self.misses = 0
        self.max_abs_drift_ns = 0
        self.sum_abs_drift_ns = 0
        self.first_actual_ns: int | None = None

    def add(self, theoretical_ns: int, actual_ns: int, deadline_met: bool) -> None:
        if self.first_actual_ns is None:
            self.first_actual_ns = actual_ns
        drift = abs(theoretical_ns - actual_ns)
        self.count += 1
        if not deadline_met:
            self.misses += 1
        if drift > self.max_abs_drift_ns:
            self.max_abs_drift_ns = drift
        self.sum_abs_drift_ns += drift
        if self.records_enabled:
            self._tr_ns.append(theoretical_ns)
            self._ar_ns.append(actual_ns)
            self._met.append(deadline_met)

    def records(self) -> Iterator[ActivationRecord]:
        for n in range(len(self._tr_ns)):
            yield ActivationRecord(
                task=self.task,
                n=n,
                theoretical_ms=self._tr_ns[n] / 1e6,
                actual_ms=self._ar_ns[n] / 1e6,
                deadline_met=self._met[n],
            )

    @property
    def miss_rate(self) -> float:
        return self.misses / self.count if self.count else 0.0

    @property
    def max_abs_drift_s(self) -> float:
        return self.max_abs_drift_ns / 1e9

    @property
    def avg_abs_drift_s(self) -> float:
        return self.sum_abs_drift_ns / self.count / 1e9 if self.count else 0.0

    def write_csv(self, path: Path) -> None:
        with open(path, "w") as f:
            f.write(self.CSV_HEADER + "\n")
            for r in self.records():
                f.write(
                    f"{r.n},{r.theoretical_ms:.6f},{r.actual_ms:.6f},"
                    f"{r.drift_ms:.6f},{1 if r.deadline_met else 0}\n"
                )

    @staticmethod
    def read_csv(path: Path, task: str | None = None) -> "ActivationLog":
        log = ActivationLog(task or Path(path).stem)
        with open(path) as f:
            header = f.readline().strip()
            if header != ActivationLog.CSV_HEADER:
                raise ValueError(f"bad activation log header in {path}: {header!r}")
            for line in f:
                n, tr, ar, _drift, met = line.strip().split(",")
                log.add(int(float(tr) * 1e6), int(float(ar) * 1e6), met == "1")
        return log


TRACE_ACTIONS = ("release", "start", "end", "block", "unblock", "miss")


class Trace:
    """Scheduling trace: (t, task, action) tuples, dumpable as JSONL."""

    def __init__(self, max_events: int | None = None):
        self.events: list[tuple[int, str, str]] = []
        self.max_events = max_events
        self.dropped = 0

    def add(self, t_ns: int, task: str, action: str) -> None:
        if self.max_events is not None and len(self.events) >= self.max_events:
            self.dropped += 1
            return
        self.events.append((t_ns, task, action))

    def write_jsonl(self, path: Path) -> None:
        with open(path, "w") as f:
            for t_ns, task, action in self.events:
                f.write(json.dumps({"t": t_ns / 1e6, "task": task, "action": action}))
                f.write("\n")

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)
