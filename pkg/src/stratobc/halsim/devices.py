"""Register-level models of the digital instruments.

Register maps are minimal inventions sized to what the control cycles
actually exercise; scale factors follow the conventions of the real part
families (centi-mbar barometer words, 100 LSB per m/s^2 accelerometer,
1.25 mV bus-voltage LSB, whole-degree board thermometer).
"""

from __future__ import annotations

from typing import Callable

from stratobc.envsim import NoiseChannel

PowerFn = Callable[[], bool]


class _RegisterDevice:
    """Shared write-pointer-then-read behaviour."""

    def __init__(self, power_fn: PowerFn):
        self._power_fn = power_fn
        self._pointer = 0

    def is_powered(self) -> bool:
        return self._power_fn()

    def transfer(self, write: bytes, read_len: int, t_ns: int) -> bytes:
        if write:
            self._pointer = write[0]
            if len(write) > 1:
                self._write_reg(self._pointer, bytes(write[1:]), t_ns)
        if read_len == 0:
            return b""
        return self._read_regs(self._pointer, read_len, t_ns)

    def _write_reg(self, reg: int, data: bytes, t_ns: int) -> None:
        raise NotImplementedError

    def _read_regs(self, reg: int, n: int, t_ns: int) -> bytes:
        raise NotImplementedError


class Barometer(_RegisterDevice):
    """Absolute barometer: pressure in centi-mbar at 0x00 (u32), temperature
    in centi-degC at 0x04 (i16), one writable config byte at 0x10."""

    PRESSURE_REG = 0x00
    TEMP_REG = 0x04
    CONFIG_REG = 0x10

    def __init__(self, pressure_fn: Callable[[int], float],
                 temp_fn: Callable[[int], float],
                 noise: NoiseChannel, power_fn: PowerFn = lambda: True):
        super().__init__(power_fn)
        self._pressure_fn = pressure_fn
        self._temp_fn = temp_fn
        self._noise = noise
        self._config = 0

    def _write_reg(self, reg: int, data: bytes, t_ns: int) -> None:
        if reg == self.CONFIG_REG:
            self._config = data[0]

    def _read_regs(self, reg: int, n: int, t_ns: int) -> bytes:
        if reg == self.PRESSURE_REG:
            mbar = max(0.0, self._pressure_fn(t_ns) + self._noise.draw())
            return int(round(mbar * 100)).to_bytes(4, "big")[:n]
        if reg == self.TEMP_REG:
            return int(round(self._temp_fn(t_ns) * 100)).to_bytes(2, "big", signed=True)[:n]
        if reg == self.CONFIG_REG:
            return bytes([self._config])[:n]
        return bytes(n)


class Imu(_RegisterDevice):
    """Inertial unit: 100 Hz internal update, little-endian 16-bit vectors.

    0x00 chip id (0xA0), 0x08 accel xyz (100 LSB per m/s^2),
    0x14 gyro xyz (16 LSB per deg/s), 0x0E mag xyz (16 LSB per uT),
    0x35 calibration status, 0x3D command (0x01 restart, 0x02 calibrate).
    """

    CHIP_ID = 0xA0
    REG_CHIP_ID = 0x00
    REG_ACCEL = 0x08
    REG_MAG = 0x0E
    REG_GYRO = 0x14
    REG_CALIB = 0x35
    REG_COMMAND = 0x3D
    UPDATE_NS = 10_000_000  # 100 Hz internal sampling

    def __init__(self, noise_seed: int, sigma: float, power_fn: PowerFn = lambda: True):
        super().__init__(power_fn)
        self._noise = NoiseChannel(noise_seed, "imu", sigma)
        self._last_update_ns = -1
        self._accel = (0.0, 0.0, 9.81)
        self._gyro = (0.0, 0.0, 0.0)
        self._mag = (22.0, 0.4, 43.0)
        self._regs = bytearray(64)
        self._regs[self.REG_CHIP_ID] = self.CHIP_ID
        self._regs[self.REG_CALIB] = 0x0F
        self.commands: list[int] = []

    def command(self, code: int) -> None:
        self.commands.append(code)
        if code == 0x01:  # restart clears calibration
            self._regs[self.REG_CALIB] = 0x0F
            self._last_update_ns = -1
        elif code == 0x02:
            self._regs[self.REG_CALIB] = 0xFF

    def _write_reg(self, reg: int, data: bytes, t_ns: int) -> None:
        if reg == self.REG_COMMAND:
            self.command(data[0])

    def _pack_vec(self, offset: int, vec: tuple[float, float, float], scale: float) -> None:
        for i, v in enumerate(vec):
            raw = int(round(v * scale))
            raw = max(-32768, min(32767, raw))
            self._regs[offset + 2 * i: offset + 2 * i + 2] = raw.to_bytes(2, "little", signed=True)

    def _refresh(self, t_ns: int) -> None:
        if self._last_update_ns >= 0 and t_ns - self._last_update_ns < self.UPDATE_NS:
            return
        self._last_update_ns = t_ns
        n = self._noise.draw
        accel = tuple(v + n() for v in self._accel)
        gyro = tuple(v + 0.1 * n() for v in self._gyro)
        mag = tuple(v + 10 * n() for v in self._mag)
        self._pack_vec(self.REG_ACCEL, accel, 100.0)
        self._pack_vec(self.REG_GYRO, gyro, 16.0)
        self._pack_vec(self.REG_MAG, mag, 16.0)

    def _read_regs(self, reg: int, n: int, t_ns: int) -> bytes:
        self._refresh(t_ns)
        return bytes(self._regs[reg: reg + n])


class PowerMonitor(_RegisterDevice):
    """Bus voltage/current/power sensor.

    0x02 bus voltage (u16, 1.25 mV LSB), 0x04 current (i16, 0.5 mA LSB),
    0x03 power (u16, 12.5 mW LSB), computed as V*I by the part.
    """

    REG_POWER = 0x03
    REG_BUS_V = 0x02
    REG_CURRENT = 0x04

    def __init__(self, supply_v_fn: Callable[[], float], load_a_fn: Callable[[], float],
                 noise_seed: int, power_fn: PowerFn = lambda: True):
        super().__init__(power_fn)
        self._supply_v_fn = supply_v_fn
        self._load_a_fn = load_a_fn
        self._noise_v = NoiseChannel(noise_seed, "pmon-v", 0.004)
        self._noise_i = NoiseChannel(noise_seed, "pmon-i", 0.0004)

    def _write_reg(self, reg: int, data: bytes, t_ns: int) -> None:
        pass

    def _read_regs(self, reg: int, n: int, t_ns: int) -> bytes:
        v = self._supply_v_fn() + self._noise_v.draw()
        i = max(0.0, self._load_a_fn() + self._noise_i.draw())
        if reg == self.REG_BUS_V:
            return int(round(v / 1.25e-3)).to_bytes(2, "big")[:n]
        if reg == self.REG_CURRENT:
            return int(round(i / 0.5e-3)).to_bytes(2, "big", signed=True)[:n]
        if reg == self.REG_POWER:
            return int(round(v * i / 12.5e-3)).to_bytes(2, "big")[:n]
        return bytes(n)


class BoardThermometer(_RegisterDevice):
    """One signed byte of board temperature at 0x00, whole degrees."""

    def __init__(self, temp_fn: Callable[[int], float], power_fn: PowerFn = lambda: True):
        super().__init__(power_fn)
        self._temp_fn = temp_fn

    def _write_reg(self, reg: int, data: bytes, t_ns: int) -> None:
        pass

    def _read_regs(self, reg: int, n: int, t_ns: int) -> bytes:
        if reg == 0x00:
            return int(self._temp_fn(t_ns)).to_bytes(1, "big", signed=True)[:n]
        return bytes(n)


class GpsReceiver:
    """Emits one GGA+RMC pair every `period_ms` of simulated time.

    Bytes become readable once fully shifted out at the configured baud
    rate (10 bits per byte on the wire). The buffer drops oldest data past
    its capacity, like a real FIFO left undrained.
    """

    BUFFER_CAP = 8192

    def __init__(self, position_fn: Callable[[int], tuple[float, float, float]],
                 noise_seed: int, sigma_deg: float,
                 baud: int = 115200, period_ms: int = 200,
                 utc_base_s: float = 10 * 3600.0,
                 power_fn: PowerFn = lambda: True):
        from stratobc.halsim import nmea

        self._nmea = nmea
        self._position_fn = position_fn
        self._noise_lat = NoiseChannel(noise_seed, "gps-lat", sigma_deg)
        self._noise_lon = NoiseChannel(noise_seed, "gps-lon", sigma_deg)
        self._baud = baud
        self._period_ns = period_ms * 1_000_000
        self._utc_base_s = utc_base_s
        self._power_fn = power_fn
        self._next_emit_ns = 0
        self._pending: list[tuple[int, bytes]] = []  # (fully-arrived-at, data)
        self._buffer = bytearray()
        self.dropped_bytes = 0

    def is_powered(self) -> bool:
        return self._power_fn()

    def _byte_time_ns(self, nbytes: int) -> int:
        return int(nbytes * 10 * 1e9 / self._baud)

    def _emit_up_to(self, t_ns: int) -> None:
        while self._next_emit_ns <= t_ns:
            emit_ns = self._next_emit_ns
            self._next_emit_ns += self._period_ns
            if not self._power_fn():
                continue
            lat, lon, alt = self._position_fn(emit_ns)
            lat += self._noise_lat.draw()
            lon += self._noise_lon.draw()
            utc = self._utc_base_s + emit_ns / 1e9
            gga = self._nmea.make_gga(utc, lat, lon, alt).encode("ascii")
            rmc = self._nmea.make_rmc(utc, lat, lon).encode("ascii")
            arrive = emit_ns + self._byte_time_ns(len(gga) + len(rmc))
            self._pending.append((arrive, gga + rmc))

    def pull_bytes(self, t_ns: int, max_bytes: int) -> bytes:
        self._emit_up_to(t_ns)
        while self._pending and self._pending[0][0] <= t_ns:
            _, data = self._pending.pop(0)
            self._buffer.extend(data)
            if len(self._buffer) > self.BUFFER_CAP:
                overflow = len(self._buffer) - self.BUFFER_CAP
                del self._buffer[:overflow]
                self.dropped_bytes += overflow
        out = bytes(self._buffer[:max_bytes])
        del self._buffer[: len(out)]
        return out
