"""Link-state machine, transports and bandwidth metering.

The onboard side is the TCP listener (one ground session at a time, newest
connection wins); the ground station connects in. Socket sends never block
a runtime task: backpressured bytes go to a bounded outbox flushed on later
polls, and overflow is dropped and counted.
"""

from __future__ import annotations

import enum
import select
import socket
import threading
from collections import deque
from typing import Callable


class LinkState(enum.Enum):
    LISTENING = "Listening"
    CONNECTED = "Connected"
    LOST = "Lost"


class BandwidthMeter:
    """Rolling-window bit counters for one direction."""

    def __init__(self, window_s: float = 10.0):
        self.window_s = window_s
        self._samples: deque[tuple[float, int]] = deque()
        self.total_bits = 0
        self._lock = threading.Lock()

    def record(self, nbytes: int, t_ms: float) -> None:
        with self._lock:
            self._samples.append((t_ms, nbytes * 8))
            self.total_bits += nbytes * 8
            self._evict(t_ms)

    def kbps(self, t_ms: float) -> float:
        with self._lock:
            self._evict(t_ms)
            bits = sum(b for _, b in self._samples)
            return bits / self.window_s / 1000.0

    def _evict(self, t_ms: float) -> None:
        horizon = t_ms - self.window_s * 1e3
        while self._samples and self._samples[0][0] < horizon:
            self._samples.popleft()


class TcpListenerTransport:
    """Non-blocking listener transport used in threaded runs."""

    OUTBOX_CAP = 262_144

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(2)
        self._listener.setblocking(False)
        self.host, self.port = self._listener.getsockname()
        self._conn: socket.socket | None = None
        self._outbox = bytearray()
        self._lock = threading.RLock()
        self.dropped_tx_bytes = 0
        self.accepted_count = 0

    # -- connection management ------------------------------------------------

    def poll(self) -> bool:
        """Accept any pending connection (newest wins) and flush the outbox.
        Returns True when a new session was accepted this poll."""
        accepted = False
        with self._lock:
            while True:
                try:
                    conn, _ = self._listener.accept()
                except (BlockingIOError, OSError):
                    break
                if self._conn is not None:
                    try:
                        self._conn.close()
                    except OSError:
                        pass
                conn.setblocking(False)
                conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                self._conn = conn
                self._outbox.clear()
                self.accepted_count += 1
                accepted = True
            self._flush_locked()
        return accepted

    @property
    def connected(self) -> bool:
        with self._lock:
            return self._conn is not None

    def recv(self) -> bytes:
        with self._lock:
            if self._conn is None:
                return b""
            chunks = []
            while True:
                try:
                    data = self._conn.recv(65536)
                except (BlockingIOError, InterruptedError):
                    break
                except OSError:
                    self._drop_conn_locked()
                    break
                if not data:  # orderly EOF from the ground side
                    self._drop_conn_locked()
                    break
                chunks.append(data)
            return b"".join(chunks)

    def send(self, data: bytes) -> bool:
        """Queue-and-flush write; never blocks the caller."""
        with self._lock:
            if self._conn is None:
                return False
            if len(self._outbox) + len(data) > self.OUTBOX_CAP:
                self.dropped_tx_bytes += len(data)
                return False
            self._outbox.extend(data)
            self._flush_locked()
            return True

    def _flush_locked(self) -> None:
        conn = self._conn
        while conn is not None and self._outbox:
            try:
                sent = conn.send(bytes(self._outbox[:65536]))
            except (BlockingIOError, InterruptedError):
                return
            except OSError:
                self._drop_conn_locked()
                return
            del self._outbox[:sent]

    def drop_connection(self) -> None:
        with self._lock:
            self._drop_conn_locked()

    def _drop_conn_locked(self) -> None:
        if self._conn is not None:
            try:
                self._conn.close()
            except OSError:
                pass
        self._conn = None
        self._outbox.clear()

    def close(self) -> None:
        with self._lock:
            self._drop_conn_locked()
            try:
                self._listener.close()
            except OSError:
                pass

    def wait_readable(self, timeout_s: float) -> bool:
        with self._lock:
            conn = self._conn
        rlist = [self._listener] + ([conn] if conn is not None else [])
        try:
            ready, _, _ = select.select(rlist, [], [], timeout_s)
        except (OSError, ValueError):
            return False
        return bool(ready)


class LoopTransport:
    """In-memory transport for deterministic runs: the virtual ground
    station reads what the onboard side sends and injects uplink bytes."""

    def __init__(self):
        self._connected = False
        self._inbound = bytearray()
        self.on_downlink: Callable[[bytes], None] | None = None
        self.accepted_count = 0
        self._pending_accept = False

    # onboard-facing API (mirrors TcpListenerTransport)
    def poll(self) -> bool:
        if self._pending_accept:
            self._pending_accept = False
            return True
        return False

    @property
    def connected(self) -> bool:
        return self._connected

    def recv(self) -> bytes:
        data = bytes(self._inbound)
        self._inbound.clear()
        return data

    def send(self, data: bytes) -> bool:
        if not self._connected:
            return False
        if self.on_downlink is not None:
            self.on_downlink(data)
        return True

    def drop_connection(self) -> None:
        self._connected = False

    def close(self) -> None:
        self._connected = False

    # ground-facing API
    def gs_connect(self) -> None:
        self._connected = True
        self._pending_accept = True
        self.accepted_count += 1

    def gs_disconnect(self) -> None:
        self._connected = False
        self._inbound.clear()

    def gs_send(self, data: bytes) -> None:
        if self._connected:
            self._inbound.extend(data)


class LinkMonitor:
    """Connection-health bookkeeping shared by the TM sender (who ticks the
    FSM) and the TC receiver (who notes inbound traffic)."""

    def __init__(self, loss_timeout_s: float = 3.0):
        self.state = LinkState.LISTENING
        self.loss_timeout_s = loss_timeout_s
        self.last_inbound_ms: float | None = None
        self.reconnect_count = 0
        self._lock = threading.Lock()

    def note_inbound(self, t_ms: float) -> None:
        with self._lock:
            self.last_inbound_ms = t_ms

    def silence_s(self, now_ms: float) -> float:
        with self._lock:
            if self.last_inbound_ms is None:
                return 0.0
            return (now_ms - self.last_inbound_ms) / 1e3
