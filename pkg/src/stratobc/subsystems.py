"""The five application task bodies: measure -> control -> actuate cycles.

Each cycle runs as its own runtime task and talks only to the simulated
buses and the data pool. Faults (bus NACKs, parse errors, queue overflow)
are counted and flagged, never raised out of a cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from stratobc.datapool import PoolRegistry, PutResult
from stratobc.domain import tasks as po
from stratobc.domain.config import MissionConfig
from stratobc.domain.types import ControlAuthority, Event, EventKind, OperatingMode
from stratobc.executor.clock import SimClock
from stratobc.halsim import nmea
from stratobc.halsim.i2c import NackError
from stratobc.halsim.pt1000 import pt1000_temp_from_voltage
from stratobc.halsim.rig import (
    SDPU_DIFF_BARO_CHANNELS,
    SDPU_PHOTODIODE_CHANNELS,
    SDPU_RADIOMETER_CHANNELS,
    SimulatedRig,
)
from stratobc.halsim.uart import UartError


# ---------------------------------------------------------------------------
# Subsystem state records (the values living in the DP-* cells)


@dataclass(frozen=True)
class GpsFix:
    lat_deg: float
    lon_deg: float
    alt_m: float
    utc_s: float
    t_ms: float


@dataclass(frozen=True)
class NadsState:
    accel_ms2: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gyro_dps: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mag_ut: tuple[float, float, float] = (0.0, 0.0, 0.0)
    fix: GpsFix | None = None
    epoch_offset_ms: float | None = None  # set by the first valid fix
    imu_stale: bool = True
    imu_errors: int = 0
    parse_errors: int = 0
    fixes_processed: int = 0
    last_imu_ms: float = 0.0


@dataclass(frozen=True)
class HtlState:
    plate_temps_c: tuple[float, ...] = ()
    heater_duties_pct: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    setpoint_c: float = 20.0
    authority: ControlAuthority = ControlAuthority.AUTONOMOUS
    ambient_mbar: float | None = None
    adc_errors: int = 0
    stale: bool = True
    t_ms: float = 0.0


@dataclass(frozen=True)
class ElState:
    radiometer_v: tuple[float, ...] = ()
    abs_pressure_mbar: tuple[float, ...] = ()
    diff_pressure_v: tuple[float, ...] = ()
    mode: OperatingMode = OperatingMode.PRE_LAUNCH
    adc_errors: int = 0
    stale: bool = True
    t_ms: float = 0.0

    @property
    def mean_pressure_mbar(self) -> float | None:
        if not self.abs_pressure_mbar:
            return None
        return sum(self.abs_pressure_mbar) / len(self.abs_pressure_mbar)


@dataclass(frozen=True)
class AtlState:
    photodiode_v: tuple[float, ...] = ()
    mode: OperatingMode = OperatingMode.PRE_LAUNCH
    stale: bool = True
    t_ms: float = 0.0


@dataclass(frozen=True)
class PcuState:
    voltage_v: float = 0.0
    current_a: float = 0.0
    power_w: float = 0.0
    board_temp_c: float = 0.0
    switches: dict = field(default_factory=dict)
    stale: bool = True
    sensor_errors: int = 0
    t_ms: float = 0.0


# Control cells written by the manager, consumed here.


@dataclass(frozen=True)
class HtlControl:
    authority: ControlAuthority = ControlAuthority.AUTONOMOUS
    manual_duties_pct: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    setpoint_c: float | None = None  # None: use the mission default


@dataclass(frozen=True)
class ElControl:
    heater_on: bool = False


@dataclass(frozen=True)
class SdpuControl:
    acquisition_enabled: bool = True


@dataclass(frozen=True)
class DeviceCommand:
    """Last commanded device configuration.

    These cells are written by the TC handler and exported with the pool
    snapshot (housekeeping); no subsystem task consumes them, since the
    shipped access matrix grants them to the TC handler alone.
    """

    name: str = ""
    args: dict = field(default_factory=dict)
    seq: int = -1


def initial_pool_values(cfg: MissionConfig) -> dict:
    boot = OperatingMode.PRE_LAUNCH
    return {
        po.DP_NADS: NadsState(),
        po.DP_HTL: HtlState(setpoint_c=cfg.heater.setpoint_c),
        po.DP_EL: ElState(),
        po.DP_ATL: AtlState(),
        po.DP_PCU: PcuState(),
        po.NADS_MODE: boot,
        po.HTL_MODE: boot,
        po.SDPU_MODE: boot,
        po.PCU_MODE: boot,
        po.TTC_MODE: boot,
        po.TTC_TM_MODE: {"sc_period_s": cfg.tm.sc_period_s, "hk_every_n": cfg.tm.hk_every_n},
        po.HTL_CTRLR: HtlControl(),
        po.EL_CTRLR: ElControl(),
        po.SDPU_CTRLR: SdpuControl(),
        po.NADS_DEV: DeviceCommand(),
        po.HTL_DEV: DeviceCommand(),
        po.SDPU_DEV: DeviceCommand(),
        po.PCU_DEV: DeviceCommand(),
    }


# ---------------------------------------------------------------------------
# Telemetry value logs (per-subsystem CSV rows, optional)


class ValueLog:
    def __init__(self, name: str, header: tuple[str, ...], enabled: bool = True):
        self.name = name
        self.header = header
        self.enabled = enabled
        self.rows: list[tuple] = []

    def add(self, *row) -> None:
        if self.enabled:
            self.rows.append(row)

    def write_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write(",".join(self.header) + "\n")
            for row in self.rows:
                f.write(",".join(str(x) for x in row) + "\n")


# ---------------------------------------------------------------------------
# IMU Measurer (10 ms, priority 6)


class ImuMeasurer:
    def __init__(self, rig: SimulatedRig, pool: PoolRegistry, clock: SimClock,
                 log_enabled: bool = False):
        self.rig = rig
        self.pool = pool
        self.clock = clock
        self.log = ValueLog("nads", ("t_ms", "ax", "ay", "az", "gx", "gy", "gz"),
                            log_enabled)

    def cycle(self) -> None:
        mode, _ = self.pool.cell(po.NADS_MODE).read()
        if mode is OperatingMode.SHUTDOWN:
            return
        t_ms = self.clock.now_ms()
        try:
            vectors = self.rig.imu_read_vectors()
        except NackError:
            self.pool.cell(po.DP_NADS).update(
                lambda s: replace(s, imu_stale=True, imu_errors=s.imu_errors + 1)
            )
            return
        self.pool.cell(po.DP_NADS).update(
            lambda s: replace(
                s,
                accel_ms2=vectors["accel_ms2"],
                gyro_dps=vectors["gyro_dps"],
                mag_ut=vectors["mag_ut"],
                imu_stale=False,
                last_imu_ms=t_ms,
            )
        )
        a, g = vectors["accel_ms2"], vectors["gyro_dps"]
        self.log.add(f"{t_ms:.3f}", *(f"{v:.4f}" for v in (*a, *g)))


# ---------------------------------------------------------------------------
# GPS Measurer (200 ms, priority 5)


class GpsMeasurer:
    def __init__(self, rig: SimulatedRig, pool: PoolRegistry, clock: SimClock):
        self.rig = rig
        self.pool = pool
        self.clock = clock
        self._carry = b""

    def cycle(self) -> None:
        mode, _ = self.pool.cell(po.NADS_MODE).read()
        if mode is OperatingMode.SHUTDOWN:
            return
        try:
            data = self.rig.uart.read(4096)
        except UartError:
            return
        if not data:
            return
        buf = self._carry + data
        *lines, tail = buf.split(b"\n")
        self._carry = tail
        for line in lines:
            self._handle_line(line.decode("ascii", errors="replace").strip())

    def _handle_line(self, line: str) -> None:
        if not line:
            return
        try:
            parsed = nmea.parse_sentence(line)
        except nmea.NmeaError:
            self.pool.cell(po.DP_NADS).update(
                lambda s: replace(s, parse_errors=s.parse_errors + 1)
            )
            return
        if not isinstance(parsed, nmea.GgaFix):
            return  # position is taken from GGA; RMC only corroborates
        t_ms = self.clock.now_ms()
        fix = GpsFix(parsed.lat_deg, parsed.lon_deg, parsed.alt_m, parsed.utc_s, t_ms)

        def apply(s: NadsState) -> NadsState:
            epoch = s.epoch_offset_ms
            if epoch is None:
                # first valid fix anchors mission time to GPS time
                epoch = parsed.utc_s * 1e3 - t_ms
            return replace(s, fix=fix, epoch_offset_ms=epoch,
                           fixes_processed=s.fixes_processed + 1)

        self.pool.cell(po.DP_NADS).update(apply)


# ---------------------------------------------------------------------------
# HTL Manager (10000 ms, priority 4)


class HtlManager:
    ZONES = 4
    PLATES_PER_ZONE = 7

    def __init__(self, rig: SimulatedRig, pool: PoolRegistry, clock: SimClock,
                 cfg: MissionConfig, log_enabled: bool = False):
        self.rig = rig
        self.pool = pool
        self.clock = clock
        self.cfg = cfg
        self.log = ValueLog("htl", ("t_ms", "mode", "authority", "mean_temp_c",
                                    "duty0", "duty1", "duty2", "duty3"), log_enabled)
        self._duties = [0.0, 0.0, 0.0, 0.0]
        self._heating = [False] * self.ZONES

    def cycle(self) -> None:
        mode, _ = self.pool.cell(po.HTL_MODE).read()
        ctrl, _ = self.pool.cell(po.HTL_CTRLR).read()
        el, _ = self.pool.cell(po.DP_EL).read()
        ambient_mbar = el.mean_pressure_mbar if not el.stale else None
        t_ms = self.clock.now_ms()

        temps = self._scan_plates()
        if temps is None:
            # hold the last commanded duties, flag the failure
            self.pool.cell(po.DP_HTL).update(
                lambda s: replace(s, adc_errors=s.adc_errors + 1, stale=True, t_ms=t_ms)
            )
            return

        setpoint = ctrl.setpoint_c if ctrl.setpoint_c is not None else self.cfg.heater.setpoint_c
        cap = self.cfg.heater.duty_cap(mode)
        if mode in (OperatingMode.DESCENT, OperatingMode.SHUTDOWN):
            duties = [0.0] * self.ZONES
        elif ctrl.authority is ControlAuthority.MANUAL:
            duties = [min(d, cap) for d in ctrl.manual_duties_pct]
        else:
            duties = self._hysteresis(temps, setpoint, cap, ambient_mbar)
        self._duties = duties
        self.rig.set_heater_arm(any(d > 0 for d in duties))
        for zone, duty in enumerate(duties):
            self.rig.set_heater_duty(zone, duty)

        prev, _ = self.pool.cell(po.DP_HTL).read()
        state = HtlState(
            plate_temps_c=tuple(temps),
            heater_duties_pct=tuple(duties),
            setpoint_c=setpoint,
            authority=ctrl.authority,
            ambient_mbar=ambient_mbar,
            adc_errors=prev.adc_errors,
            stale=False,
            t_ms=t_ms,
        )
        self.pool.cell(po.DP_HTL).write(state)
        mean = sum(temps) / len(temps)
        self.log.add(f"{t_ms:.3f}", mode.value, ctrl.authority.value, f"{mean:.3f}",
                     *(f"{d:.1f}" for d in duties))

    def _scan_plates(self) -> list[float] | None:
        temps: list[float] = []
        for zone in range(self.ZONES):
            for plate in range(self.PLATES_PER_ZONE):
                try:
                    sample = self.rig.read_channel("TMU", zone, plate)
                except NackError:
                    return None
                temps.append(pt1000_temp_from_voltage(max(1.0, min(3.0, sample.value))))
        return temps

    def _hysteresis(self, temps: list[float], setpoint: float, cap: float,
                    ambient_mbar: float | None) -> list[float]:
        """Per-zone bang-bang with hysteresis, duty capped by the mode limit.
        Heaters stay inhibited while ambient pressure is near ground level."""
        h = self.cfg.heater.hysteresis_c
        if ambient_mbar is not None and ambient_mbar > self.cfg.heater.inhibit_above_mbar:
            self._heating = [False] * self.ZONES
            return [0.0] * self.ZONES
        duties = []
        for zone in range(self.ZONES):
            zone_temps = temps[zone * self.PLATES_PER_ZONE:(zone + 1) * self.PLATES_PER_ZONE]
            mean = sum(zone_temps) / len(zone_temps)
            if mean < setpoint - h:
                self._heating[zone] = True
            elif mean > setpoint + h:
                self._heating[zone] = False
            duties.append(cap if self._heating[zone] else 0.0)
        return duties


# ---------------------------------------------------------------------------
# SDPU Measurer (1000 ms, priority 3)


class SdpuMeasurer:
    """Reads the environmental/attitude analog chains and the barometers,
    mirrors the mode into the passive EL/ATL states, and runs the float /
    cut-off / threshold detectors over the pressure series."""

    def __init__(self, rig: SimulatedRig, pool: PoolRegistry, clock: SimClock,
                 cfg: MissionConfig, log_enabled: bool = True):
        self.rig = rig
        self.pool = pool
        self.clock = clock
        self.cfg = cfg
        self.log = ValueLog("el", ("t_ms", "pressure_mbar", "rate_mbar_s", "mode"),
                            log_enabled)
        self.atl_log = ValueLog("atl", ("t_ms", "pd0", "pd1", "pd2", "pd3"), log_enabled)
        self._window: list[tuple[float, float]] = []  # (t_s, mbar)
        self._below_float_run = 0
        self._emitted: set[EventKind] = set()
        self._observed_mode = OperatingMode.PRE_LAUNCH
        self.overflow_count = 0

    # -- detectors ---------------------------------------------------------

    def _rate(self) -> float:
        if len(self._window) < self.cfg.detector.cutoff_window_samples:
            return 0.0
        (t0, p0), (t1, p1) = self._window[0], self._window[-1]
        return (p1 - p0) / (t1 - t0) if t1 > t0 else 0.0

    def _emit(self, kind: EventKind, payload: dict) -> None:
        if kind in self._emitted:
            return
        ev = Event(kind=kind, t_ms=self.clock.now_ms(), payload=payload)
        if self.pool.queue(po.EVENT_QUEUE).put(ev) is PutResult.REJECTED:
            self.overflow_count += 1
        else:
            self._emitted.add(kind)

    def _run_detectors(self, mode: OperatingMode, mode_t_ms: float,
                       pressure: float, rate: float) -> None:
        cfg = self.cfg
        payload = {"pressure_mbar": pressure, "pressure_rate_mbar_s": rate}
        if mode is OperatingMode.PRE_LAUNCH and pressure < cfg.ascent1_mbar:
            self._emit(EventKind.PRESSURE_ANOMALY, {**payload, "boundary": "ascent1"})
        elif mode is OperatingMode.ASCENT1 and pressure < cfg.ascent2_mbar:
            self._emit(EventKind.PRESSURE_ANOMALY, {**payload, "boundary": "ascent2"})
        elif mode is OperatingMode.ASCENT2:
            if pressure <= cfg.float1_mbar:
                self._below_float_run += 1
            else:
                self._below_float_run = 0
            if self._below_float_run >= cfg.detector.float_confirm_samples:
                self._emit(EventKind.FLOAT_DETECTED, payload)
        elif mode is OperatingMode.FLOAT1:
            if rate >= cfg.cutoff_rise_mbar_s:
                self._emit(EventKind.CUTOFF_DETECTED, payload)
            elif self.clock.now_ms() - mode_t_ms >= cfg.float2_delta_s * 1e3:
                elapsed_s = (self.clock.now_ms() - mode_t_ms) / 1e3
                self._emit(EventKind.FLOAT_DETECTED,
                           {**payload, "phase": "float2-timer", "elapsed_s": elapsed_s})
        elif mode is OperatingMode.FLOAT2:
            if rate >= cfg.cutoff_rise_mbar_s:
                self._emit(EventKind.CUTOFF_DETECTED, payload)
        elif mode is OperatingMode.DESCENT and pressure >= cfg.ascent1_mbar:
            self._emit(EventKind.PRESSURE_ANOMALY, {**payload, "boundary": "ground"})

    # -- cycle ---------------------------------------------------------------

    def cycle(self) -> None:
        mode, mode_t_ms = self.pool.cell(po.SDPU_MODE).read()
        if mode is not self._observed_mode:
            self._observed_mode = mode
            self._emitted.clear()
            self._below_float_run = 0
        if mode is OperatingMode.SHUTDOWN:
            return
        ctrl, _ = self.pool.cell(po.SDPU_CTRLR).read()
        if not ctrl.acquisition_enabled:
            return
        t_ms = self.clock.now_ms()

        # digital barometers first: mode detection must not wait on the
        # analog scan
        pressures = []
        for i in range(2):
            try:
                pressures.append(self.rig.baro_read_mbar(i))
            except NackError:
                pass
        if pressures:
            pressure = sum(pressures) / len(pressures)
            self._window.append((t_ms / 1e3, pressure))
            if len(self._window) > self.cfg.detector.cutoff_window_samples:
                self._window.pop(0)
            rate = self._rate()
            self._run_detectors(mode, mode_t_ms, pressure, rate)
            self.log.add(f"{t_ms:.3f}", f"{pressure:.4f}", f"{rate:.5f}", mode.value)

        radiometers, diffs, photos = [], [], []
        errors = 0
        try:
            for m, c in SDPU_RADIOMETER_CHANNELS:
                radiometers.append(self.rig.read_channel("SDPU", m, c).value)
            for m, c in SDPU_DIFF_BARO_CHANNELS:
                diffs.append(self.rig.read_channel("SDPU", m, c).value)
            for m, c in SDPU_PHOTODIODE_CHANNELS:
                photos.append(self.rig.read_channel("SDPU", m, c).value)
        except NackError:
            errors += 1

        el_prev, _ = self.pool.cell(po.DP_EL).read()
        self.pool.cell(po.DP_EL).write(ElState(
            radiometer_v=tuple(radiometers),
            abs_pressure_mbar=tuple(pressures),
            diff_pressure_v=tuple(diffs),
            mode=mode,
            adc_errors=el_prev.adc_errors + errors,
            stale=not pressures and not radiometers,
            t_ms=t_ms,
        ))
        self.pool.cell(po.DP_ATL).write(AtlState(
            photodiode_v=tuple(photos),
            mode=mode,
            stale=not photos,
            t_ms=t_ms,
        ))
        if photos:
            self.atl_log.add(f"{t_ms:.3f}", *(f"{v:.4f}" for v in photos))


# ---------------------------------------------------------------------------
# PCU Manager (5000 ms, priority 1)


#: Power rail policy per mode. The sensing rails stay up through Descent so
#: the ground-pressure shutdown trigger can still be observed; the thermal
#: experiment rail is powered only during supported flight phases.
RAIL_POLICY: dict[OperatingMode, dict[str, bool]] = {
    OperatingMode.PRE_LAUNCH: {"TMU": False, "SDPU": True, "NADS": True},
    OperatingMode.ASCENT1: {"TMU": True, "SDPU": True, "NADS": True},
    OperatingMode.ASCENT2: {"TMU": True, "SDPU": True, "NADS": True},
    OperatingMode.FLOAT1: {"TMU": True, "SDPU": True, "NADS": True},
    OperatingMode.FLOAT2: {"TMU": True, "SDPU": True, "NADS": True},
    OperatingMode.DESCENT: {"TMU": False, "SDPU": True, "NADS": True},
    OperatingMode.SHUTDOWN: {"TMU": False, "SDPU": False, "NADS": False},
}


class PcuManager:
    def __init__(self, rig: SimulatedRig, pool: PoolRegistry, clock: SimClock,
                 log_enabled: bool = False):
        self.rig = rig
        self.pool = pool
        self.clock = clock
        self.log = ValueLog("pcu", ("t_ms", "voltage_v", "current_a", "power_w",
                                    "board_temp_c"), log_enabled)

    def cycle(self) -> None:
        mode, _ = self.pool.cell(po.PCU_MODE).read()
        switches = dict(RAIL_POLICY[mode])
        for rail_name, on in switches.items():
            self.rig.set_power(rail_name, on)

        t_ms = self.clock.now_ms()
        try:
            hk = self.rig.pcu_read()
        except NackError:
            self.pool.cell(po.DP_PCU).update(
                lambda s: replace(s, stale=True, sensor_errors=s.sensor_errors + 1)
            )
            return
        prev, _ = self.pool.cell(po.DP_PCU).read()
        state = PcuState(
            voltage_v=hk["voltage_v"],
            current_a=hk["current_a"],
            power_w=hk["power_w"],
            board_temp_c=hk["board_temp_c"],
            switches=switches,
            stale=False,
            sensor_errors=prev.sensor_errors,
            t_ms=t_ms,
        )
        self.pool.cell(po.DP_PCU).write(state)
        self.log.add(f"{t_ms:.3f}", f"{state.voltage_v:.4f}", f"{state.current_a:.4f}",
                     f"{state.power_w:.4f}", f"{state.board_temp_c:.1f}")
