"""Headless ground station: scripted operator for automated system tests.

Runs either as a separate process speaking real TCP to the onboard listener
(threaded runs, also the `gs-headless` console entry point) or as a virtual
in-process driver bound to the deterministic engine's clock. Both record
every received frame with its arrival time to a transcript and compute
link-usage figures.

Script format (JSON): {"actions": [{"t_s": 5, "tc": {"id": "SetMode",
"args": {"mode": "Float1"}}}, {"t_s": 10, "action": "drop"},
{"t_s": 20, "action": "reconnect"}]}. Supported actions: drop, reconnect,
mute, unmute (mute keeps the socket but stops all uplink traffic, which
exercises the silence timeout instead of the EOF path).
"""

from __future__ import annotations

import json
import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click

from stratobc.ttc.frames import (
    Frame,
    FrameDecoder,
    FrameType,
    encode_frame,
    json_payload,
    make_json_frame,
)


@dataclass(frozen=True)
class GsAction:
    t_s: float
    kind: str  # "tc" | "drop" | "reconnect" | "mute" | "unmute"
    tc_id: str = ""
    tc_args: dict[str, Any] = field(default_factory=dict)


@dataclass
class GsScript:
    actions: list[GsAction] = field(default_factory=list)

    @classmethod
    def from_obj(cls, obj: dict[str, Any]) -> "GsScript":
        actions = []
        for raw in obj.get("actions", []):
            t_s = float(raw.get("t_s", 0.0))
            if "tc" in raw:
                tc = raw["tc"]
                actions.append(GsAction(t_s, "tc", str(tc["id"]), dict(tc.get("args", {}))))
            else:
                kind = str(raw["action"])
                if kind not in ("drop", "reconnect", "mute", "unmute"):
                    raise ValueError(f"unknown script action {kind!r}")
                actions.append(GsAction(t_s, kind))
        actions.sort(key=lambda a: a.t_s)
        return cls(actions)

    @classmethod
    def from_json(cls, source: str | Path) -> "GsScript":
        from stratobc.fsutil import read_text_or_literal

        text, _ = read_text_or_literal(source)
        return cls.from_obj(json.loads(text))


class Transcript:
    def __init__(self):
        self.entries: list[dict[str, Any]] = []
        self.bytes_down = 0
        self.bytes_up = 0

    def note_frame(self, t_s: float, direction: str, frame: Frame) -> None:
        try:
            payload = json_payload(frame)
        except ValueError:
            payload = None
        self.entries.append({
            "t_s": round(t_s, 6),
            "dir": direction,
            "type": FrameType(frame.type).name,
            "seq": frame.seq,
            "timestamp_ms": frame.timestamp_ms,
            "payload": payload,
        })

    def summary(self, duration_s: float) -> dict[str, Any]:
        down = [e for e in self.entries if e["dir"] == "down"]
        up = [e for e in self.entries if e["dir"] == "up"]
        return {
            "duration_s": duration_s,
            "frames_down": len(down),
            "frames_up": len(up),
            "bytes_down": self.bytes_down,
            "bytes_up": self.bytes_up,
            "downlink_kbps": self.bytes_down * 8 / duration_s / 1000 if duration_s else 0.0,
            "uplink_kbps": self.bytes_up * 8 / duration_s / 1000 if duration_s else 0.0,
            "first_down_t_s": down[0]["t_s"] if down else None,
            "last_down_t_s": down[-1]["t_s"] if down else None,
        }

    def write(self, record_dir: str | Path, duration_s: float) -> None:
        out = Path(record_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "gs_transcript.jsonl", "w") as f:
            for e in self.entries:
                f.write(json.dumps(e, sort_keys=True))
                f.write("\n")
        with open(out / "gs_summary.json", "w") as f:
            json.dump(self.summary(duration_s), f, indent=2, sort_keys=True)


class HeadlessGs:
    """Real-TCP scripted ground station (runs in its own process normally)."""

    CONNECT_BACKOFF_S = (0.1, 0.2, 0.4, 0.8, 1.6)

    def __init__(self, host: str, port: int, script: GsScript,
                 duration_s: float = 60.0, time_scale: float = 1.0,
                 record_dir: str | Path | None = None):
        self.host = host
        self.port = port
        self.script = script
        self.duration_s = duration_s
        self.time_scale = time_scale
        self.record_dir = record_dir
        self.transcript = Transcript()
        self._sock: socket.socket | None = None
        self._decoder = FrameDecoder()
        self._muted = False
        self._want_link = True
        self._tc_seq = 0
        self._attempts = 0

    # simulated time as seen by this process
    def _t_s(self, t0: float) -> float:
        return (time.monotonic() - t0) * self.time_scale

    def run(self) -> Transcript:
        t0 = time.monotonic()
        pending = list(self.script.actions)
        try:
            while True:
                now_s = self._t_s(t0)
                if now_s >= self.duration_s:
                    break
                while pending and pending[0].t_s <= now_s:
                    self._apply(pending.pop(0), now_s)
                if self._want_link and self._sock is None:
                    self._try_connect()
                self._pump(now_s)
        finally:
            self._close()
            if self.record_dir is not None:
                self.transcript.write(self.record_dir, self.duration_s)
        return self.transcript

    def _apply(self, action: GsAction, now_s: float) -> None:
        if action.kind == "tc":
            self.send_tc(action.tc_id, action.tc_args, now_s)
        elif action.kind == "drop":
            self._want_link = False
            self._close()
        elif action.kind == "reconnect":
            self._want_link = True
            self._attempts = 0
        elif action.kind == "mute":
            self._muted = True
        elif action.kind == "unmute":
            self._muted = False

    def _try_connect(self) -> None:
        backoff = self.CONNECT_BACKOFF_S[min(self._attempts, len(self.CONNECT_BACKOFF_S) - 1)]
        try:
            sock = socket.create_connection((self.host, self.port), timeout=1.0)
        except OSError:
            self._attempts += 1
            time.sleep(backoff / self.time_scale if self.time_scale > 1 else backoff)
            return
        sock.setblocking(False)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._decoder = FrameDecoder()
        self._attempts = 0

    def _close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None

    def _pump(self, now_s: float) -> None:
        sock = self._sock
        if sock is None:
            time.sleep(0.02)
            return
        import select

        ready, _, _ = select.select([sock], [], [], 0.02)
        if not ready:
            return
        try:
            data = sock.recv(65536)
        except (BlockingIOError, InterruptedError):
            return
        except OSError:
            self._close()
            return
        if not data:
            self._close()
            return
        self.transcript.bytes_down += len(data)
        self._decoder.feed(data)
        for frame in self._decoder:
            self.transcript.note_frame(now_s, "down", frame)
            if frame.type is FrameType.HEARTBEAT and not self._muted:
                self._send_frame(
                    Frame(FrameType.HEARTBEAT, self._next_seq(), int(now_s * 1e3)), now_s
                )

    def _next_seq(self) -> int:
        self._tc_seq += 1
        return self._tc_seq

    def send_tc(self, tc_id: str, args: dict[str, Any], now_s: float) -> None:
        frame = make_json_frame(FrameType.TC, self._next_seq(), now_s * 1e3,
                                {"id": tc_id, "args": args})
        self._send_frame(frame, now_s)

    def _send_frame(self, frame: Frame, now_s: float) -> None:
        if self._sock is None or self._muted:
            return
        data = encode_frame(frame)
        try:
            self._sock.sendall(data)
        except OSError:
            self._close()
            return
        self.transcript.bytes_up += len(data)
        self.transcript.note_frame(now_s, "up", frame)


class VirtualGs:
    """Deterministic-mode ground station driven by the virtual clock.

    Downlink frames arrive synchronously through the loop transport; uplink
    bytes go straight into the receiver task's activation queue.
    """

    def __init__(self, transport, inbound_queue, executor, script: GsScript,
                 connect_at_s: float = 0.0, heartbeat_echo: bool = True):
        self.transport = transport
        self.inbound_queue = inbound_queue
        self.executor = executor
        self.transcript = Transcript()
        self._decoder = FrameDecoder()
        self._muted = False
        self._tc_seq = 0
        self._heartbeat_echo = heartbeat_echo
        transport.on_downlink = self._on_downlink
        self.executor.schedule_at(connect_at_s, transport.gs_connect)
        for action in script.actions:
            self.executor.schedule_at(action.t_s, self._make_action(action))

    def _now_s(self) -> float:
        return self.executor.clock.now_s()

    def _make_action(self, action: GsAction):
        def run() -> None:
            if action.kind == "tc":
                self.send_tc(action.tc_id, action.tc_args)
            elif action.kind == "drop":
                self.transport.gs_disconnect()
            elif action.kind == "reconnect":
                self.transport.gs_connect()
            elif action.kind == "mute":
                self._muted = True
            elif action.kind == "unmute":
                self._muted = False

        return run

    def _on_downlink(self, data: bytes) -> None:
        self.transcript.bytes_down += len(data)
        self._decoder.feed(data)
        for frame in self._decoder:
            self.transcript.note_frame(self._now_s(), "down", frame)
            if (frame.type is FrameType.HEARTBEAT and self._heartbeat_echo
                    and not self._muted):
                self._uplink(Frame(FrameType.HEARTBEAT, self._next_tc_seq(),
                                   int(self._now_s() * 1e3)))

    def _next_tc_seq(self) -> int:
        self._tc_seq += 1
        return self._tc_seq

    def send_tc(self, tc_id: str, args: dict[str, Any]) -> None:
        frame = make_json_frame(FrameType.TC, self._next_tc_seq(),
                                self._now_s() * 1e3, {"id": tc_id, "args": args})
        self._uplink(frame)

    def _uplink(self, frame: Frame) -> None:
        if self._muted or not self.transport.connected:
            return
        data = encode_frame(frame)
        self.transcript.bytes_up += len(data)
        self.transcript.note_frame(self._now_s(), "up", frame)
        self.inbound_queue.put(data)


@click.command(name="gs-headless")
@click.option("--connect", "address", required=True, help="host:port of the onboard listener")
@click.option("--script", "script_path", type=click.Path(), default=None,
              help="JSON script of timed TCs and fault injections")
@click.option("--record", "record_dir", type=click.Path(), required=True,
              help="directory for transcript and summary")
@click.option("--duration", "duration_s", type=float, default=60.0)
@click.option("--time-scale", "time_scale", type=float, default=1.0,
              help="script seconds per wall second (match the onboard run)")
def main(address: str, script_path: str | None, record_dir: str,
         duration_s: float, time_scale: float) -> None:
    """Connect to a running onboard instance, execute a script, record
    every received frame and the computed link rates."""
    try:
        import os

        os.sched_setaffinity(0, range(os.cpu_count() or 1))
    except (AttributeError, OSError):
        pass
    host, _, port = address.partition(":")
    script = GsScript.from_json(script_path) if script_path else GsScript()
    gs = HeadlessGs(host, int(port), script, duration_s=duration_s,
                    time_scale=time_scale, record_dir=record_dir)
    transcript = gs.run()
    summary = transcript.summary(duration_s)
    click.echo(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
