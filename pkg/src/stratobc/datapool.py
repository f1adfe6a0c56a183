"""The shared-state hub: protected latest-value cells and bounded FIFO queues.

Cells hand back a complete (value, timestamp) pair under a lock, so readers
never observe a torn write. Queues are linearizable drop-newest FIFOs whose
blocking `take` is the activation mechanism for sporadic tasks. The registry
is static: all cells and queues exist at startup and none can be added later.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import threading
from collections import deque
from typing import Any, Callable, Generic, Iterable, Mapping, TypeVar

from stratobc.domain import tasks as taskdefs
from stratobc.domain.tasks import TaskSpec, compute_ceilings
from stratobc.runtimectx import current_task

V = TypeVar("V")
M = TypeVar("M")


class AccessViolation(RuntimeError):
    """A task touched a protected object missing from its declared access list."""


class RegistryError(KeyError):
    pass


class PutResult(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


class _NowFn:
    """Default time source when the pool is used without a runtime clock."""

    def __call__(self) -> int:
        import time

        return time.monotonic_ns()


def _check_access(name: str, enforce: bool) -> None:
    if not enforce:
        return
    task = current_task()
    if task is not None and name not in task.accesses:
        raise AccessViolation(
            f"task {task.name!r} accessed {name!r} which is not in its declared access list"
        )


class ProtectedCell(Generic[V]):
    """Latest-value cell with mutual exclusion and a write counter."""

    def __init__(self, name: str, initial: V, now_ns: Callable[[], int],
                 ceiling: int = 0, enforce: bool = False):
        self.name = name
        self.ceiling = ceiling
        self._now_ns = now_ns
        self._enforce = enforce
        self._lock = threading.Lock()
        self._value = initial
        self._t_ns = now_ns()
        self._writes = 0

    def read(self) -> tuple[V, float]:
        """Most recent completed write as (value, timestamp_ms)."""
        _check_access(self.name, self._enforce)
        with self._lock:
            return self._value, self._t_ns / 1e6

    def write(self, value: V) -> None:
        _check_access(self.name, self._enforce)
        with self._lock:
            self._value = value
            self._t_ns = self._now_ns()
            self._writes += 1

    def update(self, fn: Callable[[V], V]) -> V:
        """Atomic read-modify-write for cells with several field owners."""
        _check_access(self.name, self._enforce)
        with self._lock:
            self._value = fn(self._value)
            self._t_ns = self._now_ns()
            self._writes += 1
            return self._value

    @property
    def write_count(self) -> int:
        return self._writes

    def peek(self) -> tuple[V, float]:
        """Unchecked read for snapshots and tooling."""
        with self._lock:
            return self._value, self._t_ns / 1e6


class BoundedQueue(Generic[M]):
    """FIFO with a hard capacity; a put on a full queue is rejected (drop
    newest) and counted, keeping the oldest pending messages alive."""

    def __init__(self, name: str, capacity: int, now_ns: Callable[[], int],
                 ceiling: int = 0, enforce: bool = False):
        if capacity < 1:
            raise ValueError("queue capacity must be >= 1")
        self.name = name
        self.capacity = capacity
        self.ceiling = ceiling
        self._now_ns = now_ns
        self._enforce = enforce
        self._cond = threading.Condition()
        self._entries: deque[tuple[int, M]] = deque()
        self._overflows = 0
        self._closed = False
        self._put_listeners: list[Callable[["BoundedQueue[M]"], None]] = []

    def add_put_listener(self, fn: Callable[["BoundedQueue[M]"], None]) -> None:
        self._put_listeners.append(fn)

    def put(self, msg: M) -> PutResult:
        _check_access(self.name, self._enforce)
        with self._cond:
            if len(self._entries) >= self.capacity:
                self._overflows += 1
                return PutResult.REJECTED
            self._entries.append((self._now_ns(), msg))
            self._cond.notify()
        for fn in self._put_listeners:
            fn(self)
        return PutResult.ACCEPTED

    def take(self, timeout_s: float | None = None) -> M | None:
        entry = self.take_entry(timeout_s)
        return entry[1] if entry is not None else None

    def take_entry(self, timeout_s: float | None = None) -> tuple[int, M] | None:
        """Blocking take returning (put_time_ns, msg); None on timeout/close."""
        _check_access(self.name, self._enforce)
        with self._cond:
            while not self._entries:
                if self._closed:
                    return None
                if not self._cond.wait(timeout=timeout_s):
                    return None
            return self._entries.popleft()

    def take_nowait(self) -> tuple[int, M] | None:
        _check_access(self.name, self._enforce)
        with self._cond:
            if not self._entries:
                return None
            return self._entries.popleft()

    def peek_put_ns(self) -> int | None:
        with self._cond:
            return self._entries[0][0] if self._entries else None

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def __len__(self) -> int:
        with self._cond:
            return len(self._entries)

    @property
    def overflow_count(self) -> int:
        return self._overflows


class PoolRegistry:
    """All protected objects of the system, keyed by name, with their
    ceilings computed from the task set. Closed after construction."""

    def __init__(
        self,
        task_specs: Iterable[TaskSpec],
        initial_values: Mapping[str, Any],
        now_ns: Callable[[], int] | None = None,
        queue_capacities: Mapping[str, int] | None = None,
        enforce_access: bool = True,
    ):
        specs = tuple(task_specs)
        now = now_ns or _NowFn()
        ceilings = compute_ceilings(specs, known_objects=taskdefs.ALL_PROTECTED_OBJECTS)
        caps = dict(queue_capacities or {})
        self._cells: dict[str, ProtectedCell[Any]] = {}
        self._queues: dict[str, BoundedQueue[Any]] = {}
        for name in taskdefs.ALL_PROTECTED_OBJECTS:
            ceiling = ceilings.get(name, 0)
            if name in (taskdefs.TC_QUEUE, taskdefs.EVENT_QUEUE):
                self._queues[name] = BoundedQueue(
                    name, caps.get(name, 10), now, ceiling, enforce_access
                )
            else:
                self._cells[name] = ProtectedCell(
                    name, initial_values.get(name), now, ceiling, enforce_access
                )
        self.ceilings = ceilings

    def cell(self, name: str) -> ProtectedCell[Any]:
        try:
            return self._cells[name]
        except KeyError:
            raise RegistryError(f"unknown cell {name!r}") from None

    def queue(self, name: str) -> BoundedQueue[Any]:
        try:
            return self._queues[name]
        except KeyError:
            raise RegistryError(f"unknown queue {name!r}") from None

    @property
    def cell_names(self) -> tuple[str, ...]:
        return tuple(self._cells)

    @property
    def queue_names(self) -> tuple[str, ...]:
        return tuple(self._queues)

    def snapshot(self) -> dict[str, dict[str, Any]]:
        """JSON-ready dump of every cell: the pool's own export facility,
        used by the TM sender and for debugging (not subject to per-task
        access lists)."""
        out: dict[str, dict[str, Any]] = {}
        for name, cell in self._cells.items():
            value, t_ms = cell.peek()
            out[name] = {"value": jsonable(value), "t_ms": t_ms}
        return out

    def snapshot_json(self, indent: int | None = None) -> str:
        return json.dumps(self.snapshot(), indent=indent, sort_keys=True)


def jsonable(value: Any) -> Any:
    """Best-effort conversion of cell contents to JSON-serializable data."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)
        }
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value
