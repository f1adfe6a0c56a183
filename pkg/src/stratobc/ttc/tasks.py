"""The two link tasks: periodic TM sender and sporadic TC receiver.

The TM sender owns the socket lifecycle: its cycle polls for connections,
runs the link-state machine, emits heartbeats and downlinks telemetry.
Science telemetry goes out every cycle and housekeeping every N-th science
frame; both are always appended to the onboard logs, link or no link. The
TC receiver activates on inbound byte chunks, decodes frames, routes
telecommands into the TC queue (event injections straight into the event
queue, which its access list covers) and acknowledges each one.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

from stratobc.datapool import BoundedQueue, PoolRegistry, PutResult
from stratobc.domain import tasks as po
from stratobc.domain.config import MissionConfig
from stratobc.domain.types import Event, EventKind, OperatingMode, TcId, Telecommand
from stratobc.executor.clock import SimClock
from stratobc.ttc.frames import (
    Frame,
    FrameDecoder,
    FrameType,
    encode_frame,
    json_payload,
    make_json_frame,
)
from stratobc.ttc.link import BandwidthMeter, LinkMonitor, LinkState


@dataclass
class OnboardTmLog:
    """TM frames as recorded onboard, independent of link state."""

    sc: list[dict[str, Any]] = field(default_factory=list)
    hk: list[dict[str, Any]] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)

    def write_jsonl(self, out_dir) -> None:
        import json
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, rows in (("sc_tm", self.sc), ("hk_tm", self.hk), ("tm_events", self.events)):
            with open(out / f"{name}.jsonl", "w") as f:
                for row in rows:
                    f.write(json.dumps(row, sort_keys=True))
                    f.write("\n")


class TtcLink:
    """Shared link context: transport, monitor, meters, counters, tx seq."""

    def __init__(self, transport, cfg: MissionConfig, clock: SimClock):
        self.transport = transport
        self.cfg = cfg
        self.clock = clock
        self.monitor = LinkMonitor(cfg.gs.loss_timeout_s)
        self.down_meter = BandwidthMeter(cfg.gs.bandwidth_window_s)
        self.up_meter = BandwidthMeter(cfg.gs.bandwidth_window_s)
        self._tx_seq = 0
        self._tx_lock = threading.Lock()

    def next_seq(self) -> int:
        with self._tx_lock:
            self._tx_seq += 1
            return self._tx_seq

    def send_frame(self, frame: Frame) -> bool:
        data = encode_frame(frame)
        ok = self.transport.send(data)
        if ok:
            self.down_meter.record(len(data), self.clock.now_ms())
        return ok

    def send_json(self, frame_type: FrameType, obj: Any) -> Frame:
        frame = make_json_frame(frame_type, self.next_seq(), self.clock.now_ms(), obj)
        self.send_frame(frame)
        return frame


class TmSender:
    def __init__(self, pool: PoolRegistry, link: TtcLink, event_queue: BoundedQueue,
                 log: OnboardTmLog, cfg: MissionConfig, clock: SimClock):
        self.pool = pool
        self.link = link
        self.event_queue = event_queue
        self.log = log
        self.cfg = cfg
        self.clock = clock
        self._cycle_n = 0
        self._sc_sent = 0
        self._last_heartbeat_ms = -1e12
        self.sc_frames_sent = 0
        self.hk_frames_sent = 0

    def cycle(self) -> None:
        self._tick_fsm()
        mode, _ = self.pool.cell(po.TTC_MODE).read()
        n = self._cycle_n
        self._cycle_n += 1
        if mode is OperatingMode.SHUTDOWN:
            return
        rate, _ = self.pool.cell(po.TTC_TM_MODE).read()
        sc_every = max(1, round(float(rate.get("sc_period_s", 1.0)) / self.cfg.tm.sc_period_s))
        hk_every = max(1, int(rate.get("hk_every_n", self.cfg.tm.hk_every_n)))
        if n % sc_every != 0:
            return
        t_ms = self.clock.now_ms()
        snapshot = self.pool.snapshot()
        sc_payload = {
            "t_ms": t_ms,
            "nads": snapshot[po.DP_NADS],
            "el": snapshot[po.DP_EL],
            "atl": snapshot[po.DP_ATL],
        }
        frame = make_json_frame(FrameType.TM_SC, self.link.next_seq(), t_ms, sc_payload)
        self.log.sc.append({"t_ms": t_ms, "seq": frame.seq, "payload": sc_payload})
        if self.link.monitor.state is LinkState.CONNECTED:
            self.link.send_frame(frame)
            self.sc_frames_sent += 1
        if self._sc_sent % hk_every == 0:
            self._send_hk(t_ms, mode, snapshot)
        self._sc_sent += 1

    def _send_hk(self, t_ms: float, mode: OperatingMode, snapshot: dict) -> None:
        htl = snapshot[po.DP_HTL]["value"]
        hk_payload = {
            "t_ms": t_ms,
            "mode": mode.value,
            "authority": snapshot[po.HTL_CTRLR]["value"]["authority"],
            "pcu": snapshot[po.DP_PCU],
            "htl": snapshot[po.DP_HTL],
            "link": {
                "state": self.link.monitor.state.value,
                "downlink_kbps": self.link.down_meter.kbps(t_ms),
                "uplink_kbps": self.link.up_meter.kbps(t_ms),
                "reconnects": self.link.monitor.reconnect_count,
            },
            "counters": {
                "event_queue_overflows": self.event_queue.overflow_count,
                "imu_errors": snapshot[po.DP_NADS]["value"]["imu_errors"],
                "gps_parse_errors": snapshot[po.DP_NADS]["value"]["parse_errors"],
                "htl_adc_errors": htl["adc_errors"],
            },
        }
        frame = make_json_frame(FrameType.TM_HK, self.link.next_seq(), t_ms, hk_payload)
        self.log.hk.append({"t_ms": t_ms, "seq": frame.seq, "payload": hk_payload})
        if self.link.monitor.state is LinkState.CONNECTED:
            self.link.send_frame(frame)
            self.hk_frames_sent += 1

    # -- link state machine -----------------------------------------------------

    def _tick_fsm(self) -> None:
        link = self.link
        monitor = link.monitor
        now_ms = self.clock.now_ms()
        accepted = link.transport.poll()
        if accepted:
            monitor.note_inbound(now_ms)  # fresh session: grace period restarts
        if link.transport.connected:
            silent_too_long = monitor.silence_s(now_ms) > monitor.loss_timeout_s
            if monitor.state is not LinkState.CONNECTED:
                restored = monitor.state is LinkState.LOST
                monitor.state = LinkState.CONNECTED
                monitor.note_inbound(now_ms)
                if restored:
                    monitor.reconnect_count += 1
                    self._emit_link_event(EventKind.LINK_RESTORED, now_ms)
            elif silent_too_long:
                link.transport.drop_connection()
                monitor.state = LinkState.LOST
                self._emit_link_event(EventKind.LINK_LOST, now_ms)
                return
            if now_ms - self._last_heartbeat_ms >= self.cfg.gs.heartbeat_period_s * 1e3:
                self._last_heartbeat_ms = now_ms
                link.send_frame(Frame(FrameType.HEARTBEAT, link.next_seq(), int(now_ms)))
        else:
            if monitor.state is LinkState.CONNECTED:
                monitor.state = LinkState.LOST
                self._emit_link_event(EventKind.LINK_LOST, now_ms)

    def _emit_link_event(self, kind: EventKind, t_ms: float) -> None:
        self.event_queue.put(Event(kind=kind, t_ms=t_ms, payload={}))
        self.log.events.append({"t_ms": t_ms, "kind": kind.value})


class TcReceiver:
    """Sporadic on socket input: each activation drains the inbound backlog,
    so a burst of frames costs one activation, not one per chunk."""

    def __init__(self, pool: PoolRegistry, link: TtcLink, log: OnboardTmLog,
                 clock: SimClock, inbound: BoundedQueue | None = None):
        self.pool = pool
        self.link = link
        self.log = log
        self.clock = clock
        self.inbound = inbound
        self.decoder = FrameDecoder()
        self.tc_count = 0
        self.rejected_count = 0

    def handle_chunk(self, chunk: bytes) -> None:
        self._ingest(chunk)
        if self.inbound is not None:
            while True:
                entry = self.inbound.take_nowait()
                if entry is None:
                    break
                self._ingest(entry[1])

    def _ingest(self, chunk: bytes) -> None:
        if not chunk:
            return
        now_ms = self.clock.now_ms()
        self.link.up_meter.record(len(chunk), now_ms)
        self.link.monitor.note_inbound(now_ms)
        self.decoder.feed(chunk)
        for frame in self.decoder:
            self._route(frame)

    def _route(self, frame: Frame) -> None:
        if frame.type is FrameType.HEARTBEAT:
            return  # inbound activity alone is the liveness signal
        if frame.type is not FrameType.TC:
            return
        try:
            payload = json_payload(frame) or {}
            tc_id = TcId.from_name(str(payload.get("id")))
            args = payload.get("args") or {}
        except (ValueError, TypeError) as exc:
            self._ack(frame.seq, "rejected", f"bad TC payload: {exc}")
            return
        self.tc_count += 1
        if tc_id is TcId.PING:
            self._ack(frame.seq, "accepted", "pong")
            return
        if tc_id is TcId.INJECT_EVENT:
            self._inject_event(frame, args)
            return
        tc = Telecommand(tc_id, frame.seq, args)
        if self.pool.queue(po.TC_QUEUE).put(tc) is PutResult.ACCEPTED:
            self._ack(frame.seq, "accepted", "queued")
        else:
            self.rejected_count += 1
            self._ack(frame.seq, "rejected", "TC queue full")

    def _inject_event(self, frame: Frame, args: dict) -> None:
        try:
            kind = EventKind.from_name(str(args.get("kind")))
        except ValueError as exc:
            self._ack(frame.seq, "rejected", str(exc))
            return
        ev = Event(kind=kind, t_ms=self.clock.now_ms(),
                   payload={**(args.get("payload") or {}), "operator_injected": True})
        if self.pool.queue(po.EVENT_QUEUE).put(ev) is PutResult.ACCEPTED:
            self._ack(frame.seq, "accepted", "event injected")
        else:
            self.rejected_count += 1
            self._ack(frame.seq, "rejected", "event queue full")

    def _ack(self, tc_seq: int, status: str, reason: str) -> None:
        self.link.send_json(
            FrameType.TC_ACK, {"ack_seq": tc_seq, "status": status, "reason": reason}
        )


class SocketService:
    """Plumbing thread for threaded runs: pumps transport bytes into the
    receiver's activation queue (the simulated interrupt path)."""

    def __init__(self, transport, inbound: BoundedQueue, poll_s: float = 0.005):
        self.transport = transport
        self.inbound = inbound
        self.poll_s = poll_s
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, name="ttc-socket", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _loop(self) -> None:
        while not self._stop.is_set():
            self.transport.poll()
            data = self.transport.recv()
            if data:
                self.inbound.put(data)
            else:
                self.transport.wait_readable(self.poll_s)
