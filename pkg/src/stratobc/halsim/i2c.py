"""Simulated I2C buses with per-bus mutual exclusion and transaction logging.

Device register conventions used across the simulated parts: a write of
[reg, data...] stores into the register file; a write of [reg] alone sets
the read pointer for the following read. Devices never sleep inside a
transfer, so the bus lock is only ever held for a zero-latency exchange.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Callable, Protocol


class NackError(IOError):
    """No device answered: wrong address or the device is unpowered."""


class I2cDevice(Protocol):
    def transfer(self, write: bytes, read_len: int, t_ns: int) -> bytes: ...
    def is_powered(self) -> bool: ...


class TransactionLog:
    """Bounded in-memory bus log, dumpable as JSONL."""

    def __init__(self, cap: int = 200_000):
        self.entries: list[dict] = []
        self.cap = cap
        self.dropped = 0

    def add(self, t_ns: int, bus: int, addr: int, direction: str, data: bytes) -> None:
        if len(self.entries) >= self.cap:
            self.dropped += 1
            return
        self.entries.append(
            {"t_ms": t_ns / 1e6, "bus": bus, "addr": addr,
             "dir": direction, "bytes": data.hex()}
        )

    def write_jsonl(self, path: Path) -> None:
        with open(path, "w") as f:
            for e in self.entries:
                f.write(json.dumps(e))
                f.write("\n")


class I2cBus:
    """One bus: transfers to attached devices are serialized by a lock."""

    def __init__(self, bus_id: int, now_ns: Callable[[], int],
                 log: TransactionLog | None = None):
        self.bus_id = bus_id
        self._now_ns = now_ns
        self._devices: dict[int, I2cDevice] = {}
        self._lock = threading.Lock()
        self.log = log
        self.nack_count = 0

    def attach(self, addr: int, device: I2cDevice) -> None:
        if not 0 <= addr <= 0x7F:
            raise ValueError(f"I2C address {addr:#x} outside 7-bit range")
        if addr in self._devices:
            raise ValueError(f"address {addr:#x} already occupied on bus {self.bus_id}")
        self._devices[addr] = device

    @property
    def addresses(self) -> tuple[int, ...]:
        return tuple(self._devices)

    def transfer(self, addr: int, write: bytes = b"", read_len: int = 0) -> bytes:
        """Write-then-read exchange. Raises NackError for absent or
        unpowered devices."""
        with self._lock:
            t = self._now_ns()
            device = self._devices.get(addr)
            if device is None or not device.is_powered():
                self.nack_count += 1
                raise NackError(
                    f"NACK on bus {self.bus_id} addr {addr:#04x}"
                    + ("" if device is None else " (unpowered)")
                )
            if self.log is not None and write:
                self.log.add(t, self.bus_id, addr, "w", bytes(write))
            data = device.transfer(bytes(write), read_len, t)
            if self.log is not None and read_len:
                self.log.add(t, self.bus_id, addr, "r", data)
            return data
