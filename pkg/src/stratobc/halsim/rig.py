"""Topology builder wiring buses, devices and acquisition chains together.

Bus/pin budget of the simulated platform:

  interfaces: 11 GPIO role lines + 4 I2C buses + 1 UART + 4 PWM = 20
  pins:       11 role + 8 I2C + 2 UART + 4 PWM  = 25

Role lines: three RTU power switches, two 3-bit mux select buses (thermal
and sensor-processing units), two heater arm lines. Device placement: the
thermal ADC sits alone on bus 0, the IMU on bus 1, the power monitor and
board thermometer on bus 2, and bus 3 carries the two absolute barometers
plus the sensor-processing ADC.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from stratobc.domain.config import NoiseConfig
from stratobc.envsim import NoiseChannel, Profile
from stratobc.executor.clock import SimClock
from stratobc.halsim import adc as adcmod
from stratobc.halsim.adc import AdcModel, MuxBank
from stratobc.halsim.devices import Barometer, BoardThermometer, GpsReceiver, Imu, PowerMonitor
from stratobc.halsim.gpio import GpioController, PwmController
from stratobc.halsim.i2c import I2cBus, TransactionLog
from stratobc.halsim.pt1000 import T_MAX_C, T_MIN_C, pt1000_voltage
from stratobc.halsim.uart import UartPort


class AcquisitionError(RuntimeError):
    pass


class MuxRangeError(ValueError):
    pass


@dataclass(frozen=True)
class SensorSample:
    """Engineering value with provenance, stamped by the runtime clock."""

    source: str
    mux: int
    channel: int
    raw: int
    value: float
    units: str
    t_ms: float


@dataclass(frozen=True)
class TopologyAudit:
    gpio_role_lines: int
    i2c_buses: int
    uart_ports: int
    pwm_channels: int
    gpio_pins_total: int

    @property
    def interfaces_total(self) -> int:
        return self.gpio_role_lines + self.i2c_buses + self.uart_ports + self.pwm_channels


class TestBenchFixture:
    """Fixed voltages per (mux, channel) injected in place of the analog
    front-end, mirroring a resistor bench on every input."""

    def __init__(self, name: str, voltages: dict[tuple[int, int], float] | None = None):
        self.name = name
        self.voltages: dict[tuple[int, int], float] = {}
        for key, v in (voltages or {}).items():
            self.set(key[0], key[1], v)

    def set(self, mux: int, channel: int, volts: float) -> None:
        if abs(volts) > adcmod.FULL_SCALE_V:
            raise ValueError(f"bench voltage {volts} V exceeds ADC full scale")
        self.voltages[(mux, channel)] = volts

    @classmethod
    def from_csv(cls, source: Path | str, name: str | None = None) -> "TestBenchFixture":
        from stratobc.fsutil import read_text_or_literal

        text, stem = read_text_or_literal(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["mux", "channel", "volts"]:
            raise ValueError("bench fixture CSV must have header mux,channel,volts")
        fixture = cls(name or stem or "bench")
        for r in rows[1:]:
            if r:
                fixture.set(int(r[0]), int(r[1]), float(r[2]))
        return fixture

    def to_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["mux", "channel", "volts"])
            for (m, c), v in sorted(self.voltages.items()):
                w.writerow([m, c, f"{v:.4f}"])


# Bus and address assignments
TMU_BUS, NADS_BUS, PCU_BUS, SDPU_BUS = 0, 1, 2, 3
TMU_ADC_ADDR = 0x48
SDPU_ADC_ADDR = 0x49
IMU_ADDR = 0x28
POWER_MON_ADDR = 0x40
BOARD_THERMO_ADDR = 0x4D
BARO_ADDRS = (0x76, 0x77)

RAILS = ("TMU", "SDPU", "NADS")

MUX_SETTLE_NS = 1_000_000  # 1 ms select settling before a valid read
TMU_RATE_SPS = 8           # 125 ms conversions on the thermal chain
SDPU_RATE_SPS = 128        # sensor chain must fit 14 conversions in its 1 s cycle

# Live analog channel map on the sensor-processing ADC
SDPU_RADIOMETER_CHANNELS = tuple((0, ch) for ch in range(6))
SDPU_DIFF_BARO_CHANNELS = tuple((1, ch) for ch in range(4))
SDPU_PHOTODIODE_CHANNELS = tuple((2, ch) for ch in range(4))

TMU_CHANNELS = tuple((m, c) for m in range(4) for c in range(7))


class HeaterPlant:
    """Crude plate thermal model: ambient plus a duty-proportional rise.

    Fidelity is out of scope; it only needs to close the hysteresis loop
    and give each plate a distinct, deterministic reading.
    """

    GAIN_C = 40.0

    def __init__(self, ambient_fn: Callable[[int], float],
                 pwm: PwmController, armed_fn: Callable[[], bool]):
        self._ambient_fn = ambient_fn
        self._pwm = pwm
        self._armed_fn = armed_fn

    def plate_temp_c(self, zone: int, plate: int, t_ns: int) -> float:
        duty = self._pwm.duty(zone) if self._armed_fn() else 0.0
        offset = (plate - 3) * 0.05
        temp = self._ambient_fn(t_ns) + self.GAIN_C * duty / 100.0 + offset
        return max(T_MIN_C + 1.0, min(T_MAX_C - 1.0, temp))


class SimulatedRig:
    """The whole simulated platform below the subsystem logic."""

    def __init__(self, profile: Profile, clock: SimClock,
                 noise: NoiseConfig | None = None,
                 bus_log: TransactionLog | None = None,
                 supply_v: float = 28.0):
        noise = noise or NoiseConfig()
        self.profile = profile
        self.clock = clock
        self.bus_log = bus_log
        self.supply_v = supply_v

        gpio = GpioController()
        for pin, label in ((17, "TMU-PWR"), (27, "SDPU-PWR"), (22, "NADS-PWR")):
            gpio.define(pin, "power", label)
        for pin, label in ((5, "TMU-S0"), (6, "TMU-S1"), (13, "TMU-S2")):
            gpio.define(pin, "mux-select", label)
        for pin, label in ((19, "SDPU-S0"), (26, "SDPU-S1"), (21, "SDPU-S2")):
            gpio.define(pin, "mux-select", label)
        for pin, label in ((20, "HTL-ARM"), (16, "EL-ARM")):
            gpio.define(pin, "heater-arm", label)
        for i, (sda, scl) in enumerate(((2, 3), (8, 9), (10, 11), (14, 15))):
            gpio.define(sda, "i2c", f"I2C{i}-SDA")
            gpio.define(scl, "i2c", f"I2C{i}-SCL")
        gpio.define(32, "uart", "UART0-TX")
        gpio.define(33, "uart", "UART0-RX")
        for i, pin in enumerate((12, 18, 24, 25)):
            gpio.define(pin, "pwm", f"PWM{i}")
        self.gpio = gpio
        self.pwm = PwmController(4)

        now = clock.now_ns
        self.buses = tuple(I2cBus(i, now, bus_log) for i in range(4))
        self.uart = UartPort("UART0", now)

        def rail(name: str) -> Callable[[], bool]:
            label = f"{name}-PWR"
            return lambda: bool(gpio.read(label))

        # truth helpers
        def env(t_ns: int):
            return profile.sample(t_ns / 1e9)

        self._heater_plant = HeaterPlant(
            lambda t: env(t).temp_c, self.pwm, lambda: bool(gpio.read("HTL-ARM"))
        )

        # thermal chain: 28 thermistors behind 4 muxes on the TMU ADC
        self.tmu_adc = AdcModel("TMU-ADC", rail("TMU"))
        self.tmu_mux = MuxBank("TMU-MUX", self._select_reader("TMU"))
        for m, c in TMU_CHANNELS:
            self.tmu_mux.wire(m, c, self._thermistor_source(m, c))
        for ch in range(4):
            self.tmu_adc.bind_source(ch, self.tmu_mux.output(ch))
        self.buses[TMU_BUS].attach(TMU_ADC_ADDR, self.tmu_adc)

        # sensor chain: radiometers, differential barometers, photodiodes
        self.sdpu_adc = AdcModel("SDPU-ADC", rail("SDPU"))
        self.sdpu_mux = MuxBank("SDPU-MUX", self._select_reader("SDPU"))
        seed = noise.seed
        for i, (m, c) in enumerate(SDPU_RADIOMETER_CHANNELS):
            self.sdpu_mux.wire(m, c, self._radiometer_source(i, seed, noise.analog_sigma_v))
        for i, (m, c) in enumerate(SDPU_DIFF_BARO_CHANNELS):
            self.sdpu_mux.wire(m, c, self._diff_baro_source(i, seed, noise.analog_sigma_v))
        for i, (m, c) in enumerate(SDPU_PHOTODIODE_CHANNELS):
            self.sdpu_mux.wire(m, c, self._photodiode_source(i, seed, noise.analog_sigma_v))
        for ch in range(4):
            self.sdpu_adc.bind_source(ch, self.sdpu_mux.output(ch))
        self.buses[SDPU_BUS].attach(SDPU_ADC_ADDR, self.sdpu_adc)

        # absolute barometers share the sensor bus
        self.barometers = []
        for i, addr in enumerate(BARO_ADDRS):
            baro = Barometer(
                pressure_fn=lambda t: env(t).pressure_mbar,
                temp_fn=lambda t: env(t).temp_c,
                noise=NoiseChannel(seed, f"baro{i}", noise.baro_sigma_mbar,
                                   noise.baro_clip_mbar),
                power_fn=rail("SDPU"),
            )
            self.buses[SDPU_BUS].attach(addr, baro)
            self.barometers.append(baro)

        # navigation: IMU + GPS
        self.imu = Imu(seed, noise.imu_sigma, rail("NADS"))
        self.buses[NADS_BUS].attach(IMU_ADDR, self.imu)
        self.gps = GpsReceiver(
            position_fn=lambda t: (env(t).lat_deg, env(t).lon_deg, env(t).alt_m),
            noise_seed=seed,
            sigma_deg=noise.gps_sigma_deg,
            power_fn=rail("NADS"),
        )
        self.uart.attach(self.gps)

        # power control unit housekeeping sensors (self-powered monitor)
        self.power_monitor = PowerMonitor(
            supply_v_fn=lambda: self.supply_v,
            load_a_fn=self._load_current_a,
            noise_seed=seed,
        )
        self.buses[PCU_BUS].attach(POWER_MON_ADDR, self.power_monitor)
        self.board_thermo = BoardThermometer(lambda t: env(t).temp_c + 5.0)
        self.buses[PCU_BUS].attach(BOARD_THERMO_ADDR, self.board_thermo)

        # acquisition is unusable until configure_adc() picks a data rate
        self._adc_rates: dict[str, int] = {}

    # -- construction helpers -------------------------------------------------

    def _select_reader(self, rtu: str) -> Callable[[], int]:
        g = self.gpio
        s0, s1, s2 = f"{rtu}-S0", f"{rtu}-S1", f"{rtu}-S2"
        return lambda: g.read(s0) | (g.read(s1) << 1) | (g.read(s2) << 2)

    def _thermistor_source(self, zone: int, plate: int) -> Callable[[int], float]:
        plant = self._heater_plant
        return lambda t_ns: pt1000_voltage(plant.plate_temp_c(zone, plate, t_ns))

    def _radiometer_source(self, i: int, seed: int, sigma: float) -> Callable[[int], float]:
        noise = NoiseChannel(seed, f"radiometer{i}", sigma)
        profile = self.profile

        def fn(t_ns: int) -> float:
            alt = profile.sample(t_ns / 1e9).alt_m
            return 1.2 + 0.9 * min(alt / 30000.0, 1.0) + 0.01 * i + noise.draw()

        return fn

    def _diff_baro_source(self, i: int, seed: int, sigma: float) -> Callable[[int], float]:
        noise = NoiseChannel(seed, f"diffbaro{i}", sigma)
        return lambda t_ns: max(0.0, 0.08 + 0.005 * i + noise.draw())

    def _photodiode_source(self, i: int, seed: int, sigma: float) -> Callable[[int], float]:
        noise = NoiseChannel(seed, f"photodiode{i}", sigma)
        profile = self.profile

        def fn(t_ns: int) -> float:
            alt = profile.sample(t_ns / 1e9).alt_m
            return 0.45 + 0.35 * (1.0 - min(alt / 30000.0, 1.0)) + 0.005 * i + noise.draw()

        return fn

    def _load_current_a(self) -> float:
        heater_a = sum(self.pwm.duties()) / 100.0 * 0.05
        return 0.12 + heater_a

    # -- power ----------------------------------------------------------------

    def set_power(self, rail: str, on: bool) -> None:
        if rail not in RAILS:
            raise ValueError(f"unknown power rail {rail!r}")
        self.gpio.write(f"{rail}-PWR", 1 if on else 0)

    def power_state(self) -> dict[str, bool]:
        return {r: bool(self.gpio.read(f"{r}-PWR")) for r in RAILS}

    def set_all_power(self, on: bool) -> None:
        for r in RAILS:
            self.set_power(r, on)

    # -- acquisition chain ------------------------------------------------------

    def _parts(self, rtu: str) -> tuple[I2cBus, int, AdcModel]:
        if rtu == "TMU":
            return self.buses[TMU_BUS], TMU_ADC_ADDR, self.tmu_adc
        if rtu == "SDPU":
            return self.buses[SDPU_BUS], SDPU_ADC_ADDR, self.sdpu_adc
        raise ValueError(f"unknown acquisition RTU {rtu!r}")

    def mux_select(self, rtu: str, channel: int) -> None:
        """Drive the shared select lines; settles before the next read.
        Reselecting the current channel is a no-op."""
        if not 0 <= channel <= 7:
            raise MuxRangeError(f"mux channel {channel} outside 0..7")
        g = self.gpio
        current = self._select_reader(rtu)()
        if current == channel:
            return
        g.write(f"{rtu}-S0", channel & 1)
        g.write(f"{rtu}-S1", (channel >> 1) & 1)
        g.write(f"{rtu}-S2", (channel >> 2) & 1)
        self.clock.sleep_ns(MUX_SETTLE_NS)

    def configure_adc(self, rtu: str, rate_sps: int) -> None:
        """Select the converter's data rate; required before any adc_read."""
        if rate_sps not in adcmod.RATES_SPS:
            raise AcquisitionError(
                f"unsupported data rate {rate_sps} SPS (valid: {adcmod.RATES_SPS})"
            )
        self._parts(rtu)
        self._adc_rates[rtu] = rate_sps

    def configure_default_adcs(self) -> None:
        self.configure_adc("TMU", TMU_RATE_SPS)
        self.configure_adc("SDPU", SDPU_RATE_SPS)

    def adc_read(self, rtu: str, input_channel: int) -> int:
        """One conversion on `input_channel`, honoring the conversion time
        of the configured data rate."""
        if not 0 <= input_channel <= 3:
            raise MuxRangeError(f"ADC input {input_channel} outside 0..3")
        bus, addr, adc = self._parts(rtu)
        rate = self._adc_rates.get(rtu)
        if rate is None:
            raise AcquisitionError(f"{rtu} ADC is not configured")
        cfg = 0x8000 | ((input_channel & 0x3) << 12) | (adcmod.RATES_SPS.index(rate) << 5)
        bus.transfer(addr, bytes([adcmod.CONFIG_REG, cfg >> 8, cfg & 0xFF]))
        self.clock.sleep_ns(adc.conversion_time_ns)
        data = bus.transfer(addr, bytes([adcmod.CONVERSION_REG]), read_len=2)
        return int.from_bytes(data, "big", signed=True)

    def read_channel(self, rtu: str, mux: int, channel: int) -> SensorSample:
        """Full chain: select, settle, convert, scale to volts."""
        self.mux_select(rtu, channel)
        raw = self.adc_read(rtu, mux)
        return SensorSample(
            source=f"{rtu}-ADC",
            mux=mux,
            channel=channel,
            raw=raw,
            value=adcmod.to_volts(raw),
            units="V",
            t_ms=self.clock.now_ms(),
        )

    # -- equipment handlers -----------------------------------------------------

    def baro_read_mbar(self, index: int) -> float:
        data = self.buses[SDPU_BUS].transfer(
            BARO_ADDRS[index], bytes([Barometer.PRESSURE_REG]), read_len=4
        )
        return int.from_bytes(data, "big") / 100.0

    def imu_read_vectors(self) -> dict[str, tuple[float, float, float]]:
        bus = self.buses[NADS_BUS]

        def vec(reg: int, scale: float) -> tuple[float, float, float]:
            data = bus.transfer(IMU_ADDR, bytes([reg]), read_len=6)
            vals = [
                int.from_bytes(data[i: i + 2], "little", signed=True) / scale
                for i in (0, 2, 4)
            ]
            return (vals[0], vals[1], vals[2])

        return {
            "accel_ms2": vec(Imu.REG_ACCEL, 100.0),
            "gyro_dps": vec(Imu.REG_GYRO, 16.0),
            "mag_ut": vec(Imu.REG_MAG, 16.0),
        }

    def imu_command(self, code: int) -> None:
        self.buses[NADS_BUS].transfer(IMU_ADDR, bytes([Imu.REG_COMMAND, code]))

    def pcu_read(self) -> dict[str, float]:
        bus = self.buses[PCU_BUS]
        v = int.from_bytes(
            bus.transfer(POWER_MON_ADDR, bytes([PowerMonitor.REG_BUS_V]), 2), "big"
        ) * 1.25e-3
        i = int.from_bytes(
            bus.transfer(POWER_MON_ADDR, bytes([PowerMonitor.REG_CURRENT]), 2),
            "big", signed=True,
        ) * 0.5e-3
        p = int.from_bytes(
            bus.transfer(POWER_MON_ADDR, bytes([PowerMonitor.REG_POWER]), 2), "big"
        ) * 12.5e-3
        t = int.from_bytes(
            bus.transfer(BOARD_THERMO_ADDR, bytes([0x00]), 1), "big", signed=True
        )
        return {"voltage_v": v, "current_a": i, "power_w": p, "board_temp_c": float(t)}

    def set_heater_duty(self, zone: int, duty_pct: float) -> None:
        self.pwm.set_duty(zone, duty_pct)

    def set_heater_arm(self, armed: bool) -> None:
        self.gpio.write("HTL-ARM", 1 if armed else 0)

    # -- test bench ---------------------------------------------------------------

    def load_testbench(self, fixture: TestBenchFixture) -> None:
        """Replace every analog source on both chains with bench voltages;
        unlisted channels read 0 V."""
        self.tmu_mux.set_override(fixture.voltages)
        self.sdpu_mux.set_override(fixture.voltages)

    def load_testbench_for(self, rtu: str, fixture: TestBenchFixture) -> None:
        bank = self.tmu_mux if rtu == "TMU" else self.sdpu_mux
        bank.set_override(fixture.voltages)

    def clear_testbench(self) -> None:
        self.tmu_mux.set_override(None)
        self.sdpu_mux.set_override(None)

    # -- audit ----------------------------------------------------------------------

    def audit(self) -> TopologyAudit:
        counts = self.gpio.count_by_role()
        role_lines = counts.get("power", 0) + counts.get("mux-select", 0) + counts.get("heater-arm", 0)
        return TopologyAudit(
            gpio_role_lines=role_lines,
            i2c_buses=len(self.buses),
            uart_ports=1,
            pwm_channels=self.pwm.channel_count,
            gpio_pins_total=len(self.gpio.pins()),
        )
