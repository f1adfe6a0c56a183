"""Fixed-priority task runtime with wall-clock and virtual-time engines."""

from stratobc.executor.clock import SimClock, VirtualClock, WallClock
from stratobc.executor.core import ExecMode, Executor, ExecutorError, RunArtifacts
from stratobc.executor.records import ActivationLog, ActivationRecord, Trace

__all__ = [
    "ActivationLog",
    "ActivationRecord",
    "ExecMode",
    "Executor",
    "ExecutorError",
    "RunArtifacts",
    "SimClock",
    "Trace",
    "VirtualClock",
    "WallClock",
]
