"""Simulated UART port with baud-paced byte availability."""

from __future__ import annotations

import threading
from typing import Callable, Protocol


class UartError(IOError):
    pass


class UartSource(Protocol):
    def pull_bytes(self, t_ns: int, max_bytes: int) -> bytes: ...


class UartPort:
    def __init__(self, name: str, now_ns: Callable[[], int]):
        self.name = name
        self._now_ns = now_ns
        self._source: UartSource | None = None
        self._open = True
        self._lock = threading.Lock()

    def attach(self, source: UartSource) -> None:
        self._source = source

    def close(self) -> None:
        self._open = False

    def reopen(self) -> None:
        self._open = True

    def read(self, max_bytes: int = 4096) -> bytes:
        """Bytes that have fully arrived by now; empty when none pending."""
        with self._lock:
            if not self._open:
                raise UartError(f"UART {self.name} is closed")
            if self._source is None:
                return b""
            return self._source.pull_bytes(self._now_ns(), max_bytes)
