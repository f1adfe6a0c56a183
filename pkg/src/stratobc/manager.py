"""System-level brain: the sporadic TC and event handlers.

Both handlers only touch data-pool cells (never buses or sockets), keeping
their execution far inside the 500 ms deadline. Mode changes propagate to
the five subsystem mode cells in one fixed order; since both manager tasks
share a priority and the cells' ceilings cover them, a propagation is never
interleaved with another manager action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable

from stratobc.datapool import PoolRegistry
from stratobc.domain import tasks as po
from stratobc.domain.automaton import Stimulus, mode_transition
from stratobc.domain.config import MissionConfig
from stratobc.domain.types import (
    ControlAuthority,
    Event,
    EventKind,
    OperatingMode,
    TcId,
    Telecommand,
)
from stratobc.executor.clock import SimClock
from stratobc.subsystems import DeviceCommand, HtlControl

#: Fixed mode-propagation order (trace-checked for determinism).
PROPAGATION_ORDER = (po.NADS_MODE, po.HTL_MODE, po.SDPU_MODE, po.PCU_MODE, po.TTC_MODE)


@dataclass
class AckRecord:
    t_ms: float
    seq: int
    tc_id: str
    status: str  # accepted | rejected
    reason: str = ""

    def jsonable(self) -> dict[str, Any]:
        return {"t_ms": self.t_ms, "seq": self.seq, "id": self.tc_id,
                "status": self.status, "reason": self.reason}


@dataclass
class EventLogEntry:
    t_ms: float
    kind: str
    payload: dict[str, Any]
    resulting_mode: str

    def jsonable(self) -> dict[str, Any]:
        return {"t_ms": self.t_ms, "kind": self.kind, "payload": self.payload,
                "resulting_mode": self.resulting_mode}


@dataclass
class ManagerLogs:
    events: list[EventLogEntry] = field(default_factory=list)
    acks: list[AckRecord] = field(default_factory=list)
    mode_log: list[tuple[float, OperatingMode]] = field(default_factory=list)


class Manager:
    def __init__(self, pool: PoolRegistry, cfg: MissionConfig, clock: SimClock,
                 on_mode_change: Callable[[OperatingMode, float], None] | None = None):
        self.pool = pool
        self.cfg = cfg
        self.clock = clock
        self.logs = ManagerLogs()
        self.on_mode_change = on_mode_change
        self.mode = OperatingMode.PRE_LAUNCH
        self.mode_entry_ms = clock.now_ms()
        self.logs.mode_log.append((self.mode_entry_ms, self.mode))

    # -- mode propagation ---------------------------------------------------

    def propagate_mode(self, mode: OperatingMode) -> None:
        for cell_name in PROPAGATION_ORDER:
            self.pool.cell(cell_name).write(mode)
        self.mode = mode
        self.mode_entry_ms = self.clock.now_ms()
        self.logs.mode_log.append((self.mode_entry_ms, mode))
        if self.on_mode_change is not None:
            self.on_mode_change(mode, self.mode_entry_ms)

    def _elapsed_in_mode_s(self) -> float:
        return (self.clock.now_ms() - self.mode_entry_ms) / 1e3

    # -- telecommand handling -------------------------------------------------

    def handle_tc(self, tc: Telecommand) -> AckRecord:
        """Dispatch one TC; every TC yields exactly one ack record."""
        handler = {
            TcId.SET_MODE: self._tc_set_mode,
            TcId.SET_AUTHORITY: self._tc_set_authority,
            TcId.SET_HEATER: self._tc_set_heater,
            TcId.POWER_SWITCH: self._tc_power_switch,
            TcId.CALIBRATE_IMU: self._tc_calibrate_imu,
            TcId.SET_TM_RATE: self._tc_set_tm_rate,
        }.get(tc.id)
        if handler is None:
            # InjectEvent and Ping are serviced at the receiver (its access
            # list covers the event queue; this task's does not)
            ack = self._ack(tc, "rejected", f"{tc.id.value} not handled by this task")
        else:
            try:
                ack = handler(tc)
            except (KeyError, ValueError, TypeError) as exc:
                ack = self._ack(tc, "rejected", f"invalid args: {exc}")
        self.logs.acks.append(ack)
        return ack

    def _ack(self, tc: Telecommand, status: str, reason: str = "") -> AckRecord:
        return AckRecord(self.clock.now_ms(), tc.seq, tc.id.value, status, reason)

    def _tc_set_mode(self, tc: Telecommand) -> AckRecord:
        result = mode_transition(self.mode, Stimulus(tc=tc), self.cfg)
        if result.tc_rejected:
            return self._ack(tc, "rejected", result.reason or "rejected")
        if result.changed:
            self.propagate_mode(result.mode)
        return self._ack(tc, "accepted", result.cause or "")

    def _tc_set_authority(self, tc: Telecommand) -> AckRecord:
        authority = ControlAuthority(str(tc.args["authority"]))
        self.pool.cell(po.HTL_CTRLR).update(lambda c: replace(c, authority=authority))
        return self._ack(tc, "accepted")

    def _tc_set_heater(self, tc: Telecommand) -> AckRecord:
        duties = tc.args.get("duties_pct")
        setpoint = tc.args.get("setpoint_c")
        if duties is not None:
            duties = tuple(float(d) for d in duties)
            if len(duties) != 4 or any(not 0 <= d <= 100 for d in duties):
                return self._ack(tc, "rejected", "duties must be four values in 0..100")

        def apply(c: HtlControl) -> HtlControl:
            out = c
            if duties is not None:
                out = replace(out, manual_duties_pct=duties)
            if setpoint is not None:
                out = replace(out, setpoint_c=float(setpoint))
            return out

        self.pool.cell(po.HTL_CTRLR).update(apply)
        return self._ack(tc, "accepted")

    def _tc_power_switch(self, tc: Telecommand) -> AckRecord:
        switch = str(tc.args["switch"])
        if switch not in ("TMU", "SDPU", "NADS"):
            return self._ack(tc, "rejected", f"unknown switch {switch!r}")
        cmd = DeviceCommand("power-switch", dict(tc.args), tc.seq)
        self.pool.cell(po.PCU_DEV).write(cmd)
        return self._ack(tc, "accepted")

    def _tc_calibrate_imu(self, tc: Telecommand) -> AckRecord:
        self.pool.cell(po.NADS_DEV).write(DeviceCommand("calibrate", dict(tc.args), tc.seq))
        return self._ack(tc, "accepted")

    def _tc_set_tm_rate(self, tc: Telecommand) -> AckRecord:
        rate, _ = self.pool.cell(po.TTC_TM_MODE).read()
        new = dict(rate)
        if "sc_period_s" in tc.args:
            sc = float(tc.args["sc_period_s"])
            if sc <= 0:
                return self._ack(tc, "rejected", "sc_period_s must be positive")
            new["sc_period_s"] = sc
        if "hk_every_n" in tc.args:
            n = int(tc.args["hk_every_n"])
            if n < 1:
                return self._ack(tc, "rejected", "hk_every_n must be >= 1")
            new["hk_every_n"] = n
        self.pool.cell(po.TTC_TM_MODE).write(new)
        return self._ack(tc, "accepted")

    # -- event handling ---------------------------------------------------------

    def handle_event(self, ev: Event) -> None:
        if ev.kind is EventKind.LINK_LOST:
            self.pool.cell(po.HTL_CTRLR).update(
                lambda c: replace(c, authority=ControlAuthority.AUTONOMOUS)
            )
        elif ev.kind is EventKind.LINK_RESTORED:
            pass  # fail-safe bias: the operator must reclaim manual control
        elif ev.kind in (EventKind.FLOAT_DETECTED, EventKind.CUTOFF_DETECTED,
                         EventKind.PRESSURE_ANOMALY):
            self._environmental_event(ev)
        # unknown/operator kinds are logged and dropped
        self.logs.events.append(EventLogEntry(
            t_ms=self.clock.now_ms(),
            kind=ev.kind.value,
            payload=dict(ev.payload),
            resulting_mode=self.mode.value,
        ))

    def _environmental_event(self, ev: Event) -> None:
        payload = ev.payload
        stim = Stimulus(
            pressure_mbar=payload.get("pressure_mbar"),
            pressure_rate_mbar_s=float(payload.get("pressure_rate_mbar_s", 0.0)),
            elapsed_in_mode_s=self._elapsed_in_mode_s(),
            event=ev,
        )
        result = mode_transition(self.mode, stim, self.cfg)
        if result.changed:
            self.propagate_mode(result.mode)
