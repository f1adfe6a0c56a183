"""GPIO pin fabric and PWM channels."""

from __future__ import annotations

from dataclasses import dataclass


class GpioError(ValueError):
    pass


@dataclass(frozen=True)
class PinDef:
    pin: int
    role: str       # e.g. "power", "mux-select", "heater-arm", "i2c", "uart", "pwm"
    label: str      # e.g. "TMU-PWR", "TMU-S0"


class GpioController:
    """Named digital lines over a fixed pin map; values are 0/1."""

    def __init__(self):
        self._pins: dict[int, PinDef] = {}
        self._by_label: dict[str, PinDef] = {}
        self._values: dict[int, int] = {}

    def define(self, pin: int, role: str, label: str) -> None:
        if pin in self._pins:
            raise GpioError(f"pin {pin} already defined as {self._pins[pin].label}")
        if label in self._by_label:
            raise GpioError(f"label {label!r} already defined")
        d = PinDef(pin, role, label)
        self._pins[pin] = d
        self._by_label[label] = d
        self._values[pin] = 0

    def write(self, label: str, value: int) -> None:
        d = self._lookup(label)
        self._values[d.pin] = 1 if value else 0

    def read(self, label: str) -> int:
        return self._values[self._lookup(label).pin]

    def _lookup(self, label: str) -> PinDef:
        try:
            return self._by_label[label]
        except KeyError:
            raise GpioError(f"unknown GPIO label {label!r}") from None

    def pins(self) -> tuple[PinDef, ...]:
        return tuple(self._pins.values())

    def count_by_role(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for d in self._pins.values():
            counts[d.role] = counts.get(d.role, 0) + 1
        return counts


class PwmController:
    """PWM outputs driving the heaters; duty in percent, clamped to 0..100."""

    def __init__(self, channels: int = 4):
        self._duty = [0.0] * channels

    @property
    def channel_count(self) -> int:
        return len(self._duty)

    def set_duty(self, channel: int, duty_pct: float) -> None:
        if not 0 <= channel < len(self._duty):
            raise GpioError(f"PWM channel {channel} out of range")
        self._duty[channel] = min(100.0, max(0.0, float(duty_pct)))

    def duty(self, channel: int) -> float:
        return self._duty[channel]

    def duties(self) -> tuple[float, ...]:
        return tuple(self._duty)
