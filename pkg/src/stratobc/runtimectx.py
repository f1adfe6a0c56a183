"""Tracks which runtime task is executing on the current thread/greenlet.

The data pool uses this to enforce declared access lists in debug mode; code
running outside any task (tests, tooling) is unrestricted.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from typing import TYPE_CHECKING, Iterator

if TYPE_CHECKING:
    from stratobc.domain.tasks import TaskSpec

_current_task: ContextVar["TaskSpec | None"] = ContextVar("stratobc_current_task", default=None)


def current_task() -> "TaskSpec | None":
    return _current_task.get()


def set_current_task(spec: "TaskSpec | None") -> None:
    _current_task.set(spec)


@contextmanager
def task_context(spec: "TaskSpec") -> Iterator[None]:
    token = _current_task.set(spec)
    try:
        yield
    finally:
        _current_task.reset(token)
