"""16-bit delta-sigma ADC model with four multiplexed inputs.

Full scale is +-4.096 V, so one LSB is exactly 125 uV (32768/4.096 = 8000
counts per volt). A conversion started at the configured data rate becomes
readable only after its conversion time; reading earlier returns the last
completed result, mirroring the real part's conversion register.

Register map (big-endian 16-bit registers):
  0x00 conversion  last completed two's-complement result
  0x01 config      bit15 OS (start), bits14:12 input channel, bits7:5 rate code
"""

from __future__ import annotations

from typing import Callable

CONVERSION_REG = 0x00
CONFIG_REG = 0x01

FULL_SCALE_V = 4.096
COUNTS_PER_VOLT = 8000  # 32768 / 4.096
RATES_SPS = (8, 16, 32, 64, 128, 250, 475, 860)


def quantize(volts: float) -> int:
    raw = round(volts * COUNTS_PER_VOLT)
    return max(-32768, min(32767, raw))


def to_volts(raw: int) -> float:
    return raw / COUNTS_PER_VOLT


class AdcModel:
    """The converter itself; input sources are callables volts = f(t_ns)."""

    def __init__(self, name: str, power_fn: Callable[[], bool] = lambda: True):
        self.name = name
        self._power_fn = power_fn
        self._sources: list[Callable[[int], float]] = [lambda t: 0.0] * 4
        self.configured = False
        self.rate_sps = 8
        self._channel = 0
        self._ready_ns: int | None = None
        self._result = 0
        self._pointer = CONVERSION_REG

    def is_powered(self) -> bool:
        return self._power_fn()

    def bind_source(self, channel: int, fn: Callable[[int], float]) -> None:
        self._sources[channel] = fn

    @property
    def conversion_time_ns(self) -> int:
        return int(round(1e9 / self.rate_sps))

    def transfer(self, write: bytes, read_len: int, t_ns: int) -> bytes:
        if write:
            self._pointer = write[0]
            if len(write) >= 3 and self._pointer == CONFIG_REG:
                self._write_config((write[1] << 8) | write[2], t_ns)
        if read_len == 0:
            return b""
        if self._pointer == CONVERSION_REG:
            self._complete_if_due(t_ns)
            return self._result.to_bytes(2, "big", signed=True)[:read_len]
        if self._pointer == CONFIG_REG:
            cfg = (self._channel & 0x7) << 12 | (RATES_SPS.index(self.rate_sps) << 5)
            return cfg.to_bytes(2, "big")[:read_len]
        return bytes(read_len)

    def _write_config(self, value: int, t_ns: int) -> None:
        self.rate_sps = RATES_SPS[(value >> 5) & 0x7]
        self._channel = (value >> 12) & 0x3
        self.configured = True
        if value & 0x8000:  # OS bit: start a single conversion
            self._ready_ns = t_ns + self.conversion_time_ns

    def _complete_if_due(self, t_ns: int) -> None:
        if self._ready_ns is not None and t_ns >= self._ready_ns:
            # the result reflects the input at completion time
            volts = self._sources[self._channel](self._ready_ns)
            self._result = quantize(volts)
            self._ready_ns = None


class MuxBank:
    """Four 8:1 analog multiplexers sharing one 3-bit select bus.

    Mux `m` feeds ADC input `m`; the shared select lines pick the same
    channel on every mux. Unwired channels read as 0 V.
    """

    def __init__(self, name: str, select_fn: Callable[[], int]):
        self.name = name
        self._select_fn = select_fn
        self._sources: dict[tuple[int, int], Callable[[int], float]] = {}
        self._override: dict[tuple[int, int], float] | None = None

    def wire(self, mux: int, channel: int, fn: Callable[[int], float]) -> None:
        if not 0 <= mux <= 3 or not 0 <= channel <= 7:
            raise ValueError(f"mux/channel ({mux},{channel}) out of range")
        self._sources[(mux, channel)] = fn

    def set_override(self, voltages: dict[tuple[int, int], float] | None) -> None:
        """Replace every analog input with fixed bench voltages (None reverts)."""
        self._override = dict(voltages) if voltages is not None else None

    def output(self, mux: int) -> Callable[[int], float]:
        def sample(t_ns: int) -> float:
            ch = self._select_fn()
            if self._override is not None:
                return self._override.get((mux, ch), 0.0)
            fn = self._sources.get((mux, ch))
            return fn(t_ns) if fn is not None else 0.0

        return sample
