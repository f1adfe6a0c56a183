"""Task descriptors, the shipped task set, ceiling computation and validation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class TaskKind(enum.Enum):
    CYCLIC = "cyclic"
    SPORADIC = "sporadic"


@dataclass(frozen=True)
class TaskSpec:
    """Descriptor of one runtime task.

    `period_or_miat_ms` is the activation period for cyclic tasks and the
    minimum inter-arrival time for sporadic ones. Larger priority means more
    urgent. `accesses` lists the protected objects (cells and queues) this
    task may touch; the data pool enforces it in debug mode.
    """

    name: str
    kind: TaskKind
    period_or_miat_ms: float
    deadline_ms: float
    priority: int
    accesses: tuple[str, ...] = ()


class TaskSetError(ValueError):
    pass


@dataclass
class TaskSetReport:
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


# Protected object names. The registry is static: these and only these exist.
TC_QUEUE = "TC-Queue"
EVENT_QUEUE = "Event-Queue"
NADS_MODE = "NADS-Mode"
HTL_MODE = "HTL-Mode"
SDPU_MODE = "SDPU-Mode"
PCU_MODE = "PCU-Mode"
TTC_MODE = "TTC-Mode"
TTC_TM_MODE = "TTC-TM-Mode"
HTL_CTRLR = "HTL-Ctrlr"
EL_CTRLR = "EL-Ctrlr"
SDPU_CTRLR = "SDPU-Ctrlr"
NADS_DEV = "NADS-Dev"
HTL_DEV = "HTL-Dev"
SDPU_DEV = "SDPU-Dev"
PCU_DEV = "PCU-Dev"
DP_NADS = "DP-NADS"
DP_HTL = "DP-HTL"
DP_EL = "DP-EL"
DP_PCU = "DP-PCU"
DP_ATL = "DP-ATL"

MODE_CELLS = (NADS_MODE, HTL_MODE, SDPU_MODE, PCU_MODE, TTC_MODE)

ALL_PROTECTED_OBJECTS = (
    DP_NADS, DP_HTL, DP_EL, DP_PCU, DP_ATL,
    NADS_MODE, HTL_MODE, SDPU_MODE, PCU_MODE, TTC_MODE, TTC_TM_MODE,
    HTL_CTRLR, EL_CTRLR, SDPU_CTRLR, HTL_DEV, NADS_DEV, SDPU_DEV, PCU_DEV,
    TC_QUEUE, EVENT_QUEUE,
)

# Task names, reused by the scheduler trace and the drift reports.
TASK_TC_HANDLER = "TC Handler"
TASK_EVENT_HANDLER = "Event Handler"
TASK_TC_RECEIVER = "TC Receiver"
TASK_TM_SENDER = "TM Sender"
TASK_IMU = "IMU Measurer"
TASK_GPS = "GPS Measurer"
TASK_HTL = "HTL Manager"
TASK_SDPU = "SDPU Measurer"
TASK_PCU = "PCU Manager"


def flight_task_specs() -> tuple[TaskSpec, ...]:
    """The shipped task set: periods/MIATs, deadlines, priorities, access lists."""
    c, s = TaskKind.CYCLIC, TaskKind.SPORADIC
    return (
        TaskSpec(TASK_TC_HANDLER, s, 1000, 500, 3, (
            TC_QUEUE, NADS_MODE, NADS_DEV, HTL_MODE, HTL_CTRLR, HTL_DEV,
            SDPU_MODE, SDPU_DEV, EL_CTRLR, PCU_MODE, PCU_DEV, TTC_MODE, TTC_TM_MODE,
        )),
        TaskSpec(TASK_EVENT_HANDLER, s, 1000, 500, 3, (
            EVENT_QUEUE, NADS_MODE, HTL_MODE, HTL_CTRLR, PCU_MODE, SDPU_MODE,
            EL_CTRLR, TTC_MODE,
        )),
        TaskSpec(TASK_TC_RECEIVER, s, 1000, 1000, 2, (
            EVENT_QUEUE, TTC_TM_MODE, TC_QUEUE, DP_NADS, DP_HTL, DP_EL, DP_PCU, DP_ATL,
        )),
        TaskSpec(TASK_TM_SENDER, c, 1000, 1000, 2, (
            EVENT_QUEUE, TTC_TM_MODE, TTC_MODE,
        )),
        TaskSpec(TASK_IMU, c, 10, 10, 6, (NADS_MODE, DP_NADS)),
        TaskSpec(TASK_GPS, c, 200, 200, 5, (NADS_MODE, DP_NADS)),
        TaskSpec(TASK_HTL, c, 10000, 10000, 4, (HTL_MODE, HTL_CTRLR, DP_HTL, DP_EL)),
        TaskSpec(TASK_SDPU, c, 1000, 1000, 3, (
            EVENT_QUEUE, SDPU_MODE, SDPU_CTRLR, DP_ATL, DP_EL, EL_CTRLR,
        )),
        TaskSpec(TASK_PCU, c, 5000, 5000, 1, (PCU_MODE, DP_PCU)),
    )


def compute_ceilings(
    tasks: Sequence[TaskSpec],
    known_objects: Iterable[str] | None = None,
) -> dict[str, int]:
    """Ceiling of each protected object: max priority over all accessor tasks.

    When `known_objects` is given, any access to a name outside it is a
    validation error listing the orphan ids.
    """
    if known_objects is not None:
        known = set(known_objects)
        orphans = sorted(
            {obj for t in tasks for obj in t.accesses if obj not in known}
        )
        if orphans:
            raise TaskSetError(f"tasks reference unknown protected objects: {orphans}")
    ceilings: dict[str, int] = {}
    for task in tasks:
        for obj in task.accesses:
            cur = ceilings.get(obj)
            if cur is None or task.priority > cur:
                ceilings[obj] = task.priority
    return ceilings


def validate_task_set(tasks: Sequence[TaskSpec]) -> TaskSetReport:
    """Check the task set against the deadline-monotonic assignment.

    A deadline-monotonic deviation (a task outranking some task with an
    equal-or-shorter deadline) is a warning, not an error: the shipped set
    deliberately promotes two tasks above their deadline rank. A deadline
    longer than the period is an error, as is a duplicated task name.
    """
    if not tasks:
        raise TaskSetError("task set is empty")
    report = TaskSetReport()

    seen: set[str] = set()
    for t in tasks:
        if t.name in seen:
            report.errors.append(f"duplicate task name: {t.name}")
        seen.add(t.name)
        if t.deadline_ms > t.period_or_miat_ms:
            report.errors.append(
                f"{t.name}: deadline {t.deadline_ms:g} ms exceeds "
                f"period/MIAT {t.period_or_miat_ms:g} ms"
            )

    for t in tasks:
        witnesses = [
            o.name
            for o in tasks
            if o is not t and o.deadline_ms <= t.deadline_ms and o.priority < t.priority
        ]
        if witnesses:
            report.warnings.append(
                f"{t.name} (D={t.deadline_ms:g} ms, P={t.priority}) sits above its "
                f"deadline-monotonic rank: outranks {', '.join(witnesses)} despite "
                "their equal-or-shorter deadlines"
            )
    return report
