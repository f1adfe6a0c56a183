"""The task runtime: fixed-priority cyclic/sporadic execution in two modes.

THREADED runs one host thread per task against the scaled wall clock:
best-effort preemptive fixed priorities (SCHED_FIFO where permitted), all
threads pinned to a single core where the platform allows. It is the mode
whose activation logs feed the drift analysis.

DETERMINISTIC runs every task body on the caller's thread under virtual
time, one greenlet per task. Bodies execute in zero virtual time; only
explicit waits (device latencies, queue gates, periods) advance the clock,
during which other released jobs run. Dispatch among ready jobs is strictly
(priority desc, release asc, name asc), so runs are bit-reproducible.
"""

from __future__ import annotations

import enum
import heapq
import os
import threading
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import greenlet

from stratobc.domain.tasks import TaskKind, TaskSpec
from stratobc.executor.clock import SimClock, VirtualClock, WallClock
from stratobc.executor.records import ActivationLog, Trace
from stratobc.runtimectx import set_current_task

MS = 1_000_000  # ns per millisecond


class ExecutorError(RuntimeError):
    pass


class ExecMode(enum.Enum):
    DETERMINISTIC = "deterministic"
    THREADED = "threaded"


@dataclass
class RunArtifacts:
    """Everything a run leaves behind for analysis."""

    mode: ExecMode
    duration_s: float
    logs: dict[str, ActivationLog]
    failures: list[dict[str, Any]] = field(default_factory=list)
    trace: Trace | None = None
    stop_reason: str = "duration elapsed"

    @property
    def total_activations(self) -> int:
        return sum(log.count for log in self.logs.values())

    @property
    def total_misses(self) -> int:
        return sum(log.misses for log in self.logs.values())

    @property
    def miss_rate(self) -> float:
        total = self.total_activations
        return self.total_misses / total if total else 0.0

    @property
    def max_abs_drift_s(self) -> float:
        return max((log.max_abs_drift_s for log in self.logs.values()), default=0.0)

    def stats(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "duration_s": self.duration_s,
            "stop_reason": self.stop_reason,
            "failures": self.failures,
            "tasks": {
                name: {
                    "activations": log.count,
                    "misses": log.misses,
                    "miss_rate": log.miss_rate,
                    "avg_abs_drift_s": log.avg_abs_drift_s,
                    "max_abs_drift_s": log.max_abs_drift_s,
                }
                for name, log in self.logs.items()
            },
        }

    def write(self, out_dir: Path) -> None:
        import json

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "run_stats.json", "w") as f:
            json.dump(self.stats(), f, indent=2, sort_keys=True)
        logs_dir = out_dir / "activation"
        logs_dir.mkdir(exist_ok=True)
        for name, log in self.logs.items():
            if log.records_enabled:
                safe = name.lower().replace(" ", "_")
                log.write_csv(logs_dir / f"{safe}.csv")
        if self.trace is not None:
            self.trace.write_jsonl(out_dir / "trace.jsonl")


class _Task:
    __slots__ = (
        "spec", "body", "queue", "handler", "log",
        # deterministic-engine state
        "glet", "state", "job_release_ns", "resuming", "pending_releases",
        "next_release_ns", "miat_gate_ns", "gate_event_pending",
    )

    IDLE, READY, RUNNING, SLEEPING = range(4)

    def __init__(self, spec: TaskSpec, body=None, queue=None, handler=None,
                 records_enabled: bool = True):
        self.spec = spec
        self.body = body
        self.queue = queue
        self.handler = handler
        self.log = ActivationLog(spec.name, records_enabled)
        self.glet = None
        self.state = _Task.IDLE
        self.job_release_ns = 0
        self.resuming = False
        self.pending_releases: deque[int] = deque()
        self.next_release_ns = 0
        self.miat_gate_ns = 0
        self.gate_event_pending = False

    @property
    def period_ns(self) -> int:
        return int(self.spec.period_or_miat_ms * MS)

    @property
    def deadline_ns(self) -> int:
        return int(self.spec.deadline_ms * MS)


class Executor:
    """Owns all task execution; bodies communicate only through the data
    pool, queues and the simulated buses."""

    def __init__(
        self,
        mode: ExecMode,
        time_scale: float = 1.0,
        trace: bool = False,
        record_activations: bool = True,
        trace_cap: int | None = 2_000_000,
    ):
        self.mode = mode
        self.time_scale = time_scale
        self._tasks: dict[str, _Task] = {}
        self._callbacks: list[tuple[int, int, Callable[[], None]]] = []
        self._record_activations = record_activations
        self.trace = Trace(trace_cap) if trace else None
        self._ran = False
        self._stop_reason: str | None = None
        self._stop_event = threading.Event()
        self._failures: list[dict[str, Any]] = []
        self._det_engine: "_DetEngine | None" = None
        if mode is ExecMode.DETERMINISTIC:
            self.clock: SimClock = VirtualClock()
        else:
            self.clock = WallClock(time_scale)

    # -- registration --------------------------------------------------------

    def register_cyclic(self, spec: TaskSpec, body: Callable[[], None]) -> None:
        if spec.kind is not TaskKind.CYCLIC:
            raise ExecutorError(f"{spec.name} is not a cyclic task")
        self._register(_Task(spec, body=body, records_enabled=self._record_activations))

    def register_sporadic(self, spec: TaskSpec, queue, handler: Callable[[Any], None]) -> None:
        if spec.kind is not TaskKind.SPORADIC:
            raise ExecutorError(f"{spec.name} is not a sporadic task")
        task = _Task(spec, queue=queue, handler=handler,
                     records_enabled=self._record_activations)
        self._register(task)
        if self.mode is ExecMode.DETERMINISTIC:
            queue.add_put_listener(self._on_put)

    def _register(self, task: _Task) -> None:
        if self._ran:
            raise ExecutorError("cannot register tasks after the run started")
        if task.spec.name in self._tasks:
            raise ExecutorError(f"duplicate task registration: {task.spec.name}")
        self._tasks[task.spec.name] = task

    def schedule_at(self, t_s: float, fn: Callable[[], None]) -> None:
        """Run `fn` at simulated time `t_s` (engine context: must not block).

        In threaded mode callbacks must be scheduled before run() starts.
        """
        if self._det_engine is not None:
            self._det_engine._push(int(t_s * 1e9), _EV_CALL, fn)
        else:
            heapq.heappush(self._callbacks, (int(t_s * 1e9), len(self._callbacks), fn))

    def request_stop(self, reason: str = "stop requested") -> None:
        if self._stop_reason is None:
            self._stop_reason = reason
        self._stop_event.set()

    # -- run -----------------------------------------------------------------

    def run(self, duration_s: float) -> RunArtifacts:
        if self._ran:
            raise ExecutorError("executor already ran; build a fresh one per run")
        if not self._tasks:
            raise ExecutorError("no tasks registered")
        self._ran = True
        if self.mode is ExecMode.DETERMINISTIC:
            _DetEngine(self).run(duration_s)
        else:
            _ThreadedEngine(self).run(duration_s)
        logs = {name: t.log for name, t in self._tasks.items()}
        return RunArtifacts(
            mode=self.mode,
            duration_s=duration_s,
            logs=logs,
            failures=self._failures,
            trace=self.trace,
            stop_reason=self._stop_reason or "duration elapsed",
        )

    def _record_failure(self, task: str, exc: BaseException) -> None:
        self._failures.append(
            {"task": task, "t_ms": self.clock.now_ms(), "error": repr(exc)}
        )

    # deterministic-mode put hook (installed on sporadic queues)
    def _on_put(self, queue) -> None:
        engine = getattr(self, "_det_engine", None)
        if engine is not None:
            engine.on_queue_put(queue)


# ---------------------------------------------------------------------------
# Deterministic engine

_EV_RELEASE, _EV_WAKE, _EV_GATE, _EV_CALL = range(4)


class _DetEngine:
    def __init__(self, ex: Executor):
        self.ex = ex
        self.clock: VirtualClock = ex.clock  # type: ignore[assignment]
        self.tasks = list(ex._tasks.values())
        self.by_queue = {id(t.queue): t for t in self.tasks if t.queue is not None}
        self.heap: list[tuple[int, int, int, Any]] = []
        self._seq = 0
        self.hub = None
        self.current: _Task | None = None

    # -- heap helpers --------------------------------------------------------

    def _push(self, t_ns: int, kind: int, obj: Any) -> None:
        self._seq += 1
        heapq.heappush(self.heap, (t_ns, self._seq, kind, obj))

    # -- public (called from task greenlets / queue hooks) -------------------

    def in_task(self) -> bool:
        cur = self.current
        return cur is not None and greenlet.getcurrent() is cur.glet

    def task_sleep_ns(self, duration_ns: int) -> None:
        task = self.current
        assert task is not None
        task.state = _Task.SLEEPING
        self._push(self.clock.now_ns() + duration_ns, _EV_WAKE, task)
        self._trace(task.spec.name, "block")
        self.hub.switch()

    def on_queue_put(self, queue) -> None:
        task = self.by_queue.get(id(queue))
        if task is None or task.state is not _Task.IDLE:
            return
        now = self.clock.now_ns()
        eligible = max(now, task.miat_gate_ns)
        if eligible <= now:
            self._make_ready(task, release_ns=now)
        elif not task.gate_event_pending:
            task.gate_event_pending = True
            self._push(eligible, _EV_GATE, task)

    # -- engine internals ----------------------------------------------------

    def _trace(self, task: str, action: str) -> None:
        if self.ex.trace is not None:
            self.ex.trace.add(self.clock.now_ns(), task, action)

    def _make_ready(self, task: _Task, release_ns: int) -> None:
        # the message itself is dequeued at dispatch, so it keeps occupying
        # queue capacity until the job actually starts
        task.state = _Task.READY
        task.resuming = False
        task.job_release_ns = release_ns
        self._trace(task.spec.name, "release")

    def _pick(self) -> _Task | None:
        best: _Task | None = None
        best_key = None
        for t in self.tasks:
            if t.state is not _Task.READY:
                continue
            key = (-t.spec.priority, t.job_release_ns, t.spec.name)
            if best_key is None or key < best_key:
                best, best_key = t, key
        return best

    def run(self, duration_s: float) -> None:
        end_ns = int(duration_s * 1e9)
        self.hub = greenlet.getcurrent()
        self.clock.attach_engine(self)
        self.ex._det_engine = self
        try:
            while self.ex._callbacks:
                t_ns, _, fn = heapq.heappop(self.ex._callbacks)
                self._push(t_ns, _EV_CALL, fn)
            for t in self.tasks:
                t.glet = greenlet.greenlet(self._task_main)
                if t.spec.kind is TaskKind.CYCLIC:
                    t.next_release_ns = 0
                    self._push(0, _EV_RELEASE, t)
                elif t.queue is not None and len(t.queue) > 0:
                    # messages queued before start activate at t=0
                    self._push(0, _EV_GATE, t)
                    t.gate_event_pending = True
            while not self.ex._stop_event.is_set():
                task = self._pick()
                if task is not None:
                    self._dispatch(task)
                    continue
                if not self.heap or self.heap[0][0] >= end_ns:
                    self.clock.advance_to(end_ns)
                    break
                t_ns = self.heap[0][0]
                self.clock.advance_to(t_ns)
                while self.heap and self.heap[0][0] == t_ns:
                    _, _, kind, obj = heapq.heappop(self.heap)
                    self._apply_event(kind, obj)
        finally:
            self.clock.detach_engine()
            self.ex._det_engine = None

    def _apply_event(self, kind: int, obj: Any) -> None:
        now = self.clock.now_ns()
        if kind == _EV_RELEASE:
            task: _Task = obj
            if task.state is _Task.IDLE:
                self._make_ready(task, release_ns=task.next_release_ns)
            else:
                task.pending_releases.append(task.next_release_ns)
            task.next_release_ns += task.period_ns
            self._push(task.next_release_ns, _EV_RELEASE, task)
        elif kind == _EV_WAKE:
            task = obj
            if task.state is _Task.SLEEPING:
                task.state = _Task.READY
                task.resuming = True
        elif kind == _EV_GATE:
            task = obj
            task.gate_event_pending = False
            if task.state is _Task.IDLE and task.queue is not None and len(task.queue) > 0:
                self._make_ready(task, release_ns=max(now, task.miat_gate_ns))
        elif kind == _EV_CALL:
            obj()

    def _dispatch(self, task: _Task) -> None:
        resuming = task.resuming
        task.state = _Task.RUNNING
        task.resuming = False
        self.current = task
        set_current_task(task.spec)
        if resuming:
            self._trace(task.spec.name, "unblock")
        task.glet.switch()
        set_current_task(None)
        self.current = None
        if task.state is _Task.IDLE:
            self._job_finished(task)

    def _job_finished(self, task: _Task) -> None:
        now = self.clock.now_ns()
        if task.spec.kind is TaskKind.CYCLIC:
            if task.pending_releases:
                self._make_ready(task, release_ns=task.pending_releases.popleft())
        else:
            task.miat_gate_ns = task.job_release_ns + task.period_ns
            if task.queue is not None and len(task.queue) > 0:
                eligible = max(now, task.miat_gate_ns)
                if eligible <= now:
                    self._make_ready(task, release_ns=eligible)
                elif not task.gate_event_pending:
                    task.gate_event_pending = True
                    self._push(eligible, _EV_GATE, task)

    def _task_main(self) -> None:
        task = self.current
        assert task is not None
        ex = self.ex
        while True:
            release = task.job_release_ns
            start = self.clock.now_ns()
            self._trace(task.spec.name, "start")
            try:
                if task.spec.kind is TaskKind.CYCLIC:
                    task.body()
                else:
                    entry = task.queue.take_nowait()
                    if entry is not None:
                        task.handler(entry[1])
            except Exception as exc:  # body faults are contained, never fatal
                ex._record_failure(task.spec.name, exc)
            end = self.clock.now_ns()
            met = end <= release + task.deadline_ns
            if task.spec.kind is TaskKind.CYCLIC:
                first = task.log.first_actual_ns
                theoretical = start if first is None else first + task.log.count * task.period_ns
            else:
                theoretical = start
            task.log.add(theoretical, start, met)
            self._trace(task.spec.name, "end")
            if not met:
                self._trace(task.spec.name, "miss")
            task.state = _Task.IDLE
            self.hub.switch()


# ---------------------------------------------------------------------------
# Threaded engine

def _try_enable_fifo(priority: int) -> bool:
    """Best-effort SCHED_FIFO for the calling thread; needs privileges."""
    try:
        os.sched_setscheduler(0, os.SCHED_FIFO, os.sched_param(4 + priority))
        return True
    except (AttributeError, OSError, ValueError):
        return False


class _ThreadedEngine:
    JOIN_TIMEOUT_WALL_S = 5.0

    def __init__(self, ex: Executor):
        self.ex = ex
        self.clock: WallClock = ex.clock  # type: ignore[assignment]
        self.stop = ex._stop_event
        self.trace_lock = threading.Lock()

    def _trace(self, task: str, action: str, t_ns: int | None = None) -> None:
        if self.ex.trace is not None:
            with self.trace_lock:
                self.ex.trace.add(t_ns if t_ns is not None else self.clock.now_ns(),
                                  task, action)

    def run(self, duration_s: float) -> None:
        tasks = list(self.ex._tasks.values())
        barrier = threading.Barrier(len(tasks) + 1)
        threads = [
            threading.Thread(
                target=self._cyclic_loop if t.spec.kind is TaskKind.CYCLIC else self._sporadic_loop,
                args=(t, barrier),
                name=f"task:{t.spec.name}",
                daemon=True,
            )
            for t in tasks
        ]
        old_affinity: set[int] | None = None
        try:
            # One logical core for all task threads, matching the target's
            # single-core task layout. Best effort: skipped where forbidden.
            old_affinity = os.sched_getaffinity(0)
            os.sched_setaffinity(0, {min(old_affinity)})
        except (AttributeError, OSError):
            old_affinity = None
        callback_thread = None
        if self.ex._callbacks:
            callback_thread = threading.Thread(
                target=self._callback_loop, name="task:callbacks", daemon=True
            )
        try:
            for th in threads:
                th.start()
            if callback_thread is not None:
                callback_thread.start()
            self.clock.start()
            barrier.wait()
            wall_s = duration_s / self.clock.time_scale
            self.stop.wait(timeout=wall_s)
            self.stop.set()
            for t in tasks:
                if t.queue is not None:
                    t.queue.close()
            for th in threads:
                th.join(timeout=self.JOIN_TIMEOUT_WALL_S)
            if callback_thread is not None:
                callback_thread.join(timeout=self.JOIN_TIMEOUT_WALL_S)
        finally:
            if old_affinity is not None:
                try:
                    os.sched_setaffinity(0, old_affinity)
                except OSError:
                    pass

    def _cyclic_loop(self, task: _Task, barrier: threading.Barrier) -> None:
        set_current_task(task.spec)
        _try_enable_fifo(task.spec.priority)
        barrier.wait()
        clock, stop, ex = self.clock, self.stop, self.ex
        period, deadline = task.period_ns, task.deadline_ns
        first_sched = clock.now_ns()
        ar0: int | None = None
        n = 0
        while not stop.is_set():
            release = first_sched + n * period
            if not clock.interruptible_sleep_until_ns(release, stop):
                break
            start = clock.now_ns()
            self._trace(task.spec.name, "start", start)
            try:
                task.body()
            except Exception as exc:
                ex._record_failure(task.spec.name, exc)
            end = clock.now_ns()
            met = end <= release + deadline
            if ar0 is None:
                ar0 = start
            task.log.add(ar0 + n * period, start, met)
            if not met:
                self._trace(task.spec.name, "miss", end)
            n += 1

    def _sporadic_loop(self, task: _Task, barrier: threading.Barrier) -> None:
        set_current_task(task.spec)
        _try_enable_fifo(task.spec.priority)
        barrier.wait()
        clock, stop, ex = self.clock, self.stop, self.ex
        miat, deadline = task.period_ns, task.deadline_ns
        gate = 0
        # take() timeout in wall seconds keeps the loop responsive to stop
        take_timeout = 0.1
        while not stop.is_set():
            entry = task.queue.take_entry(timeout_s=take_timeout)
            if entry is None:
                continue
            put_ns, msg = entry
            if clock.now_ns() < gate:
                if not clock.interruptible_sleep_until_ns(gate, stop):
                    break
            release = max(put_ns, gate)
            start = clock.now_ns()
            self._trace(task.spec.name, "start", start)
            try:
                task.handler(msg)
            except Exception as exc:
                ex._record_failure(task.spec.name, exc)
            end = clock.now_ns()
            met = end <= release + deadline
            task.log.add(start, start, met)
            if not met:
                self._trace(task.spec.name, "miss", end)
            gate = start + miat

    def _callback_loop(self) -> None:
        pending = sorted(self.ex._callbacks)
        clock, stop = self.clock, self.stop
        i = 0
        while i < len(pending) and not stop.is_set():
            t_ns, _, fn = pending[i]
            if clock.now_ns() >= t_ns:
                try:
                    fn()
                except Exception as exc:
                    self.ex._record_failure("callbacks", exc)
                i += 1
            else:
                stop.wait(timeout=0.01)
