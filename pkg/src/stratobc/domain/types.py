"""Core mission types: operating modes, control authority, events and telecommands."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping


class OperatingMode(enum.Enum):
    """Mission phase. Transitions walk the chain in order; Shutdown is absorbing."""

    PRE_LAUNCH = "PreLaunch"
    ASCENT1 = "Ascent1"
    ASCENT2 = "Ascent2"
    FLOAT1 = "Float1"
    FLOAT2 = "Float2"
    DESCENT = "Descent"
    SHUTDOWN = "Shutdown"

    @property
    def rank(self) -> int:
        return _MODE_RANK[self]

    def is_forward(self, other: "OperatingMode") -> bool:
        """True when `other` lies strictly ahead of this mode on the chain."""
        return other.rank > self.rank

    @classmethod
    def from_name(cls, name: str) -> "OperatingMode":
        try:
            return _MODE_BY_NAME[name]
        except KeyError:
            raise ValueError(f"unknown operating mode {name!r}") from None


MODE_CHAIN = (
    OperatingMode.PRE_LAUNCH,
    OperatingMode.ASCENT1,
    OperatingMode.ASCENT2,
    OperatingMode.FLOAT1,
    OperatingMode.FLOAT2,
    OperatingMode.DESCENT,
    OperatingMode.SHUTDOWN,
)

_MODE_RANK = {mode: i for i, mode in enumerate(MODE_CHAIN)}
_MODE_BY_NAME = {mode.value: mode for mode in MODE_CHAIN}


class ControlAuthority(enum.Enum):
    """Who commands the heater loop. Link loss forces AUTONOMOUS."""

    MANUAL = "Manual"
    AUTONOMOUS = "Autonomous"


class EventKind(enum.Enum):
    FLOAT_DETECTED = "FloatDetected"
    CUTOFF_DETECTED = "CutoffDetected"
    LINK_LOST = "LinkLost"
    LINK_RESTORED = "LinkRestored"
    PRESSURE_ANOMALY = "PressureAnomaly"
    OPERATOR_INJECTED = "OperatorInjected"

    @classmethod
    def from_name(cls, name: str) -> "EventKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValueError(f"unknown event kind {name!r}")


@dataclass(frozen=True)
class Event:
    """Asynchronous notification flowing through the event queue.

    `t_ms` is milliseconds since mission epoch and must be monotone
    non-decreasing per producer.
    """

    kind: EventKind
    t_ms: float
    payload: Mapping[str, Any] = field(default_factory=dict)


class TcId(enum.Enum):
    SET_MODE = "SetMode"
    SET_AUTHORITY = "SetAuthority"
    SET_HEATER = "SetHeater"
    POWER_SWITCH = "PowerSwitch"
    CALIBRATE_IMU = "CalibrateImu"
    SET_TM_RATE = "SetTmRate"
    INJECT_EVENT = "InjectEvent"
    PING = "Ping"

    @classmethod
    def from_name(cls, name: str) -> "TcId":
        for tcid in cls:
            if tcid.value == name:
                return tcid
        raise ValueError(f"unknown telecommand id {name!r}")


@dataclass(frozen=True)
class Telecommand:
    """Uplink command. `seq` is strictly increasing per ground-station session."""

    id: TcId
    seq: int
    args: Mapping[str, Any] = field(default_factory=dict)
