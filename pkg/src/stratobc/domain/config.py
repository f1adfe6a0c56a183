"""Mission configuration: thresholds, timing, heater policy and link settings.

Configs load from a JSON document with a fixed key set; unknown keys are
rejected so a typo in an ops file fails loudly instead of silently using a
default.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from stratobc.domain.types import OperatingMode


class ConfigError(ValueError):
    pass


# Heater duty ceilings differ per mode: reduced dissipation in the first float
# stage, full power in the second, everything off outside powered flight.
_DEFAULT_DUTY_LIMITS = {
    OperatingMode.PRE_LAUNCH: 0.0,
    OperatingMode.ASCENT1: 60.0,
    OperatingMode.ASCENT2: 60.0,
    OperatingMode.FLOAT1: 60.0,
    OperatingMode.FLOAT2: 100.0,
    OperatingMode.DESCENT: 0.0,
    OperatingMode.SHUTDOWN: 0.0,
}


@dataclass(frozen=True)
class HeaterConfig:
    setpoint_c: float = 20.0
    hysteresis_c: float = 0.5
    duty_limit_pct: Mapping[OperatingMode, float] = field(
        default_factory=lambda: dict(_DEFAULT_DUTY_LIMITS)
    )
    # Heaters only make sense in thin air; inhibit while still near ground pressure.
    inhibit_above_mbar: float = 900.0

    def duty_cap(self, mode: OperatingMode) -> float:
        return self.duty_limit_pct.get(mode, 0.0)


@dataclass(frozen=True)
class DetectorConfig:
    # Consecutive below-threshold samples required before declaring float
    # conditions; rejects single noisy samples near the threshold.
    float_confirm_samples: int = 3
    # Window length (samples) for the sustained pressure-rise cut-off check.
    cutoff_window_samples: int = 5


@dataclass(frozen=True)
class TmConfig:
    sc_period_s: float = 1.0
    hk_every_n: int = 10


@dataclass(frozen=True)
class QueueConfig:
    event_capacity: int = 10
    tc_capacity: int = 10


@dataclass(frozen=True)
class GsConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 0  # 0 = ephemeral, actual port read back after bind
    heartbeat_period_s: float = 1.0
    loss_timeout_s: float = 3.0
    bandwidth_window_s: float = 10.0
    bandwidth_quota_kbps: float = 500.0


@dataclass(frozen=True)
class NoiseConfig:
    seed: int = 20230925
    baro_sigma_mbar: float = 0.06
    # Hard clip keeps worst-case barometer deviation below the 0.25 mbar budget.
    baro_clip_mbar: float = 0.2
    analog_sigma_v: float = 0.002
    imu_sigma: float = 0.01
    gps_sigma_deg: float = 1.5e-6


@dataclass(frozen=True)
class MissionConfig:
    """Validated mission parameters shared by the automaton and subsystems."""

    ascent1_mbar: float = 900.0
    ascent2_mbar: float = 300.0  # no stated trigger exists for this boundary; chosen default
    float1_mbar: float = 21.5
    float2_delta_s: float = 21600.0  # 6 h flight value; vacuum-chamber preset uses 1200 s
    cutoff_rise_mbar_s: float = 0.5
    time_scale: float = 1.0
    heater: HeaterConfig = field(default_factory=HeaterConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    tm: TmConfig = field(default_factory=TmConfig)
    queues: QueueConfig = field(default_factory=QueueConfig)
    gs: GsConfig = field(default_factory=GsConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)

    def __post_init__(self) -> None:
        if not (self.ascent1_mbar > self.ascent2_mbar > self.float1_mbar > 0):
            raise ConfigError(
                "pressure thresholds must satisfy ascent1 > ascent2 > float1 > 0, got "
                f"{self.ascent1_mbar}/{self.ascent2_mbar}/{self.float1_mbar}"
            )
        if self.time_scale <= 0:
            raise ConfigError(f"time_scale must be positive, got {self.time_scale}")
        if self.float2_delta_s <= 0:
            raise ConfigError("float2_delta_s must be positive")
        if self.cutoff_rise_mbar_s <= 0:
            raise ConfigError("cutoff_rise_mbar_s must be positive")
        for mode, cap in self.heater.duty_limit_pct.items():
            if not 0.0 <= cap <= 100.0:
                raise ConfigError(f"duty limit for {mode.value} out of range: {cap}")


def flight_config(**overrides: Any) -> MissionConfig:
    """Nominal flight parameter set."""
    return dataclasses.replace(MissionConfig(), **overrides)


def tvac_config(time_scale: float = 60.0, **overrides: Any) -> MissionConfig:
    """Vacuum-chamber replay preset.

    The float-2 delta timer is shortened to 20 minutes and the cut-off rate
    threshold lowered below the chamber's 10 mbar/min re-pressurisation slope
    (0.167 mbar/s) so the ramp back to ground pressure is detected as cut-off.
    """
    preset: dict[str, Any] = {
        "float2_delta_s": 1200.0,
        "cutoff_rise_mbar_s": 0.08,
        "time_scale": time_scale,
    }
    preset.update(overrides)
    return dataclasses.replace(MissionConfig(), **preset)


# ---------------------------------------------------------------------------
# JSON loading


def _build(cls: type, data: Mapping[str, Any], path: str) -> Any:
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"unknown config keys at {path or 'top level'}: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        f = fields[name]
        sub = _NESTED.get((cls, name))
        if sub is not None:
            if not isinstance(value, Mapping):
                raise ConfigError(f"{path}{name} must be an object")
            kwargs[name] = _build(sub, value, f"{path}{name}.")
        elif name == "duty_limit_pct":
            kwargs[name] = {
                OperatingMode.from_name(k): float(v) for k, v in value.items()
            }
        else:
            kwargs[name] = value
    return cls(**kwargs)


_NESTED = {
    (MissionConfig, "heater"): HeaterConfig,
    (MissionConfig, "detector"): DetectorConfig,
    (MissionConfig, "tm"): TmConfig,
    (MissionConfig, "queues"): QueueConfig,
    (MissionConfig, "gs"): GsConfig,
    (MissionConfig, "noise"): NoiseConfig,
}


def load_config(source: str | Path | Mapping[str, Any]) -> MissionConfig:
    """Load a MissionConfig from a JSON file, JSON string or plain mapping."""
    if isinstance(source, Mapping):
        data = source
    else:
        from stratobc.fsutil import read_text_or_literal

        text, _ = read_text_or_literal(source)
        data = json.loads(text)
    if not isinstance(data, Mapping):
        raise ConfigError("config document must be a JSON object")
    return _build(MissionConfig, data, "")


def dump_config(cfg: MissionConfig) -> dict[str, Any]:
    """Inverse of load_config, suitable for json.dump."""

    def convert(obj: Any) -> Any:
        if dataclasses.is_dataclass(obj):
            return {f.name: convert(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, Mapping):
            return {
                (k.value if isinstance(k, OperatingMode) else k): convert(v)
                for k, v in obj.items()
            }
        return obj

    return convert(cfg)
