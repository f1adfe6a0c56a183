"""Simulated hardware layer: thermistor curve, NMEA, ADC chain, buses, topology."""

import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratobc.envsim import make_flight_profile
from stratobc.executor.clock import VirtualClock
from stratobc.halsim import adc as adcmod
from stratobc.halsim import nmea
from stratobc.halsim.i2c import I2cBus, NackError, TransactionLog
from stratobc.halsim.pt1000 import (
    Pt1000RangeError,
    pt1000_resistance,
    pt1000_temp_from_voltage,
    pt1000_voltage,
)
from stratobc.halsim.rig import (
    AcquisitionError,
    MuxRangeError,
    SimulatedRig,
    TMU_CHANNELS,
)
from stratobc.halsim.rig import TestBenchFixture as BenchFixture

LSB_V = 1.0 / adcmod.COUNTS_PER_VOLT


@pytest.fixture
def rig():
    clock = VirtualClock()
    r = SimulatedRig(make_flight_profile(), clock, bus_log=TransactionLog())
    r.set_all_power(True)
    r.configure_default_adcs()
    return r


class TestPt1000:
    def test_zero_celsius_divider_symmetry(self):
        assert pt1000_resistance(0.0) == pytest.approx(1000.0)
        assert pt1000_voltage(0.0) == pytest.approx(2.375)

    def test_hundred_celsius(self):
        r = pt1000_resistance(100.0)
        assert r == pytest.approx(1385.055)
        # divider arithmetic: 4.75 * 1385.055 / 2385.055
        assert pt1000_voltage(100.0) == pytest.approx(4.75 * 1385.055 / 2385.055, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(t=st.floats(-90.0, 125.0, allow_nan=False))
    def test_inverse_identity(self, t):
        assert pt1000_temp_from_voltage(pt1000_voltage(t)) == pytest.approx(t, abs=1e-6)

    def test_out_of_range_rejected(self):
        with pytest.raises(Pt1000RangeError):
            pt1000_voltage(-91.0)
        with pytest.raises(Pt1000RangeError):
            pt1000_voltage(126.0)


class TestNmea:
    def test_checksum_is_xor_of_body(self):
        body = "GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,"
        expected = 0
        for ch in body:
            expected ^= ord(ch)
        assert nmea.checksum(body) == expected
        assert nmea.make_sentence(body).endswith(f"*{expected:02X}\r\n")

    def test_gga_roundtrip_reference_fix(self):
        s = nmea.make_gga(36000.0, 40.437699, -3.672525, 25000.0)
        fix = nmea.parse_sentence(s)
        assert isinstance(fix, nmea.GgaFix)
        assert fix.lat_deg == pytest.approx(40.437699, abs=1e-9)
        assert fix.lon_deg == pytest.approx(-3.672525, abs=1e-9)

    def test_rmc_roundtrip(self):
        s = nmea.make_rmc(3661.5, -33.5, 151.25)
        fix = nmea.parse_sentence(s)
        assert isinstance(fix, nmea.RmcFix)
        assert fix.valid
        assert fix.lat_deg == pytest.approx(-33.5, abs=1e-7)
        assert fix.lon_deg == pytest.approx(151.25, abs=1e-7)

    def test_corrupted_checksum_raises(self):
        s = nmea.make_gga(0.0, 40.0, -3.0, 100.0)
        bad = s.replace("*", "9*", 1)  # perturb the body, keep the checksum
        with pytest.raises(nmea.ChecksumError):
            nmea.parse_sentence(bad)

    def test_malformed_input_raises(self):
        with pytest.raises(nmea.NmeaError):
            nmea.parse_sentence("not a sentence")

    def test_unknown_type_returns_none(self):
        assert nmea.parse_sentence(nmea.make_sentence("GPZDA,1,2,3")) is None


class TestAdcModel:
    def test_zero_volts_zero_counts(self):
        assert adcmod.quantize(0.0) == 0

    def test_full_scale_saturates(self):
        assert adcmod.quantize(4.096) == 32767
        assert adcmod.quantize(9.0) == 32767
        assert adcmod.quantize(-9.0) == -32768

    def test_quantize_oracle_value(self):
        # round(2.3559 / 4.096 * 32768) computed independently
        assert round(2.3559 / 4.096 * 32768) == 18847
        assert adcmod.quantize(2.3559) == 18847

    @settings(max_examples=300, deadline=None)
    @given(v=st.floats(0.0, 4.095, allow_nan=False))
    def test_roundtrip_within_half_lsb(self, v):
        assert abs(adcmod.to_volts(adcmod.quantize(v)) - v) <= 0.5 * LSB_V + 1e-12


class TestAcquisitionChain:
    def test_eight_conversions_take_a_second(self, rig):
        t0 = rig.clock.now_ns()
        for _ in range(8):
            rig.adc_read("TMU", 0)
        assert (rig.clock.now_ns() - t0) >= 1_000_000_000

    def test_conversion_unavailable_until_latency_elapses(self, rig):
        """Reading the conversion register before the conversion time has
        passed returns the last completed result, not the pending one."""
        import stratobc.halsim.adc as adcmod

        rig.load_testbench_for("TMU", BenchFixture("t", {(0, 0): 1.0}))
        first = rig.read_channel("TMU", 0, 0)  # completes a 1.0 V conversion
        rig.load_testbench_for("TMU", BenchFixture("t", {(0, 0): 3.0}))
        bus = rig.buses[0]
        cfg = 0x8000 | (0 << 12) | (adcmod.RATES_SPS.index(8) << 5)
        bus.transfer(0x48, bytes([adcmod.CONFIG_REG, cfg >> 8, cfg & 0xFF]))
        stale = bus.transfer(0x48, bytes([adcmod.CONVERSION_REG]), read_len=2)
        assert int.from_bytes(stale, "big", signed=True) == first.raw
        rig.clock.sleep_ns(125_000_000)
        fresh = bus.transfer(0x48, bytes([adcmod.CONVERSION_REG]), read_len=2)
        assert abs(adcmod.to_volts(int.from_bytes(fresh, "big", signed=True)) - 3.0) <= LSB_V

    def test_unconfigured_adc_rejected(self):
        clock = VirtualClock()
        r = SimulatedRig(make_flight_profile(), clock)
        r.set_all_power(True)
        with pytest.raises(AcquisitionError, match="not configured"):
            r.adc_read("TMU", 0)

    def test_bad_rate_rejected(self, rig):
        with pytest.raises(AcquisitionError):
            rig.configure_adc("TMU", 100)

    def test_mux_select_range_error(self, rig):
        with pytest.raises(MuxRangeError):
            rig.mux_select("TMU", 8)

    def test_mux_reselect_is_idempotent(self, rig):
        rig.mux_select("TMU", 5)
        t0 = rig.clock.now_ns()
        rig.mux_select("TMU", 5)
        assert rig.clock.now_ns() == t0  # no second settling delay

    def test_bench_channel_follows_selection(self, rig):
        fixture = BenchFixture("t", {(0, 5): 1.25, (0, 2): 2.5})
        rig.load_testbench_for("TMU", fixture)
        assert abs(rig.read_channel("TMU", 0, 5).value - 1.25) <= LSB_V
        assert abs(rig.read_channel("TMU", 0, 2).value - 2.5) <= LSB_V

    def test_empty_fixture_reads_zero(self, rig):
        rig.load_testbench_for("TMU", BenchFixture("empty"))
        assert rig.read_channel("TMU", 1, 3).value == 0.0

    def test_clear_testbench_restores_thermistors(self, rig):
        rig.load_testbench_for("TMU", BenchFixture("empty"))
        rig.clear_testbench()
        v = rig.read_channel("TMU", 0, 0).value
        assert 1.5 < v < 3.0  # a plausible thermistor divider voltage

    @settings(max_examples=60, deadline=None)
    @given(v=st.floats(0.0, 4.095, allow_nan=False))
    def test_roundtrip_any_bench_voltage(self, v):
        clock = VirtualClock()
        r = SimulatedRig(make_flight_profile(), clock)
        r.set_all_power(True)
        r.configure_default_adcs()
        r.load_testbench_for("SDPU", BenchFixture("hb", {(2, 4): v}))
        assert abs(r.read_channel("SDPU", 2, 4).value - v) <= LSB_V

    def test_fixture_rejects_over_range(self):
        with pytest.raises(ValueError):
            BenchFixture("bad", {(0, 0): 4.2})

    def test_sample_provenance(self, rig):
        s = rig.read_channel("TMU", 2, 6)
        assert (s.source, s.mux, s.channel, s.units) == ("TMU-ADC", 2, 6, "V")
        assert s.t_ms == rig.clock.now_ms()


class TestI2c:
    def test_barometer_reads_ground_pressure(self, rig):
        p = rig.baro_read_mbar(0)
        assert abs(p - 954.0) < 0.25

    def test_config_register_echoes(self, rig):
        bus = rig.buses[3]
        bus.transfer(0x76, bytes([0x10, 0xA5]))
        assert bus.transfer(0x76, bytes([0x10]), read_len=1) == b"\xa5"

    def test_unpowered_device_nacks(self, rig):
        rig.set_power("SDPU", False)
        with pytest.raises(NackError):
            rig.baro_read_mbar(0)

    def test_absent_address_nacks(self, rig):
        with pytest.raises(NackError):
            rig.buses[0].transfer(0x11, b"\x00", read_len=1)

    def test_power_gating_covers_every_gated_device(self, rig):
        rig.set_all_power(False)
        with pytest.raises(NackError):
            rig.adc_read("TMU", 0)
        with pytest.raises(NackError):
            rig.adc_read("SDPU", 0)
        with pytest.raises(NackError):
            rig.imu_read_vectors()
        with pytest.raises(NackError):
            rig.baro_read_mbar(1)
        rig.pcu_read()  # the power monitor itself is never gated

    def test_bus_serialization_under_threads(self, rig):
        """Transfers on one bus never interleave: each transaction's write
        and read entries stay adjacent in the bus log."""
        errors = []

        def hammer():
            try:
                for _ in range(300):
                    rig.buses[3].transfer(0x76, bytes([0x00]), read_len=4)
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        threads = [threading.Thread(target=hammer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        log = rig.bus_log.entries
        pressure_ops = [e for e in log if e["addr"] == 0x76]
        assert len(pressure_ops) % 2 == 0
        for w, r in zip(pressure_ops[0::2], pressure_ops[1::2]):
            assert (w["dir"], r["dir"]) == ("w", "r")

    def test_transaction_log_dumps_jsonl(self, rig, tmp_path):
        import json

        rig.baro_read_mbar(0)
        path = tmp_path / "bus.jsonl"
        rig.bus_log.write_jsonl(path)
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert rows and set(rows[0]) == {"t_ms", "bus", "addr", "dir", "bytes"}


class TestTopology:
    def test_interface_budget(self, rig):
        audit = rig.audit()
        assert audit.gpio_role_lines == 11
        assert audit.i2c_buses == 4
        assert audit.uart_ports == 1
        assert audit.pwm_channels == 4
        assert audit.interfaces_total == 20

    def test_gpio_pin_budget(self, rig):
        assert rig.audit().gpio_pins_total == 25

    def test_barometers_share_sensor_bus_with_adc(self, rig):
        addrs = rig.buses[3].addresses
        assert 0x76 in addrs and 0x77 in addrs and 0x49 in addrs

    def test_full_bench_covers_28_thermal_channels(self):
        from importlib import resources

        path = resources.files("stratobc.halsim").joinpath("fixtures/bench/tmu_bench_28.csv")
        with path.open("r") as f:
            fixture = BenchFixture.from_csv(f.read(), "tmu28")
        assert set(fixture.voltages) == set(TMU_CHANNELS)


class TestGpsDevice:
    def test_five_hertz_sentence_pairs(self, rig):
        rig.clock.sleep_ns(1_000_000_000)
        data = rig.uart.read(8192).decode()
        assert data.count("$GPGGA") == 5
        assert data.count("$GPRMC") == 5

    def test_sentences_carry_valid_checksums(self, rig):
        rig.clock.sleep_ns(600_000_000)
        for line in rig.uart.read(8192).decode().strip().splitlines():
            assert line.endswith(tuple("0123456789ABCDEF"))
            assert nmea.parse_sentence(line) is not None or True  # no exception

    def test_empty_buffer_reads_empty(self, rig):
        rig.uart.read(8192)
        assert rig.uart.read(8192) == b""

    def test_closed_port_errors(self, rig):
        from stratobc.halsim.uart import UartError

        rig.uart.close()
        with pytest.raises(UartError):
            rig.uart.read(16)

    def test_baud_pacing_delays_availability(self):
        clock = VirtualClock()
        r = SimulatedRig(make_flight_profile(), clock)
        r.set_all_power(True)
        # at t=0 the first pair was just emitted: not a single full byte yet
        assert r.uart.read(8192) == b""
        clock.sleep_ns(20_000_000)  # 20 ms > ~13 ms at 115200 baud
        assert r.uart.read(8192) != b""


class TestPcuDevices:
    def test_housekeeping_readings(self, rig):
        hk = rig.pcu_read()
        assert hk["voltage_v"] == pytest.approx(28.0, abs=0.05)
        assert hk["power_w"] == pytest.approx(hk["voltage_v"] * hk["current_a"], rel=0.01)

    def test_board_thermometer_quantizes_to_whole_degrees(self, rig):
        hk = rig.pcu_read()
        assert hk["board_temp_c"] == int(hk["board_temp_c"])
        # ground ambient (~16.5 degC at the 954 mbar altitude) plus the
        # 5 degC electronics offset, whole-degree resolution
        ambient = rig.profile.sample(0.0).temp_c
        assert abs(hk["board_temp_c"] - (ambient + 5.0)) <= 1.0

    def test_supply_cases_track_configured_rail(self, rig):
        for supply in (26.0, 30.0):
            rig.supply_v = supply
            assert rig.pcu_read()["voltage_v"] == pytest.approx(supply, abs=0.05)


class TestHeaters:
    def test_duty_clamped_to_percent_range(self, rig):
        rig.set_heater_duty(0, 150.0)
        assert rig.pwm.duty(0) == 100.0
        rig.set_heater_duty(0, -5.0)
        assert rig.pwm.duty(0) == 0.0

    def test_bad_channel_rejected(self, rig):
        from stratobc.halsim.gpio import GpioError

        with pytest.raises(GpioError):
            rig.set_heater_duty(4, 10.0)

    def test_duty_raises_plate_temperature_when_armed(self, rig):
        from stratobc.halsim.pt1000 import pt1000_temp_from_voltage

        def plate0_temp():
            return pt1000_temp_from_voltage(rig.read_channel("TMU", 0, 0).value)

        rig.set_heater_arm(True)
        cold = plate0_temp()
        rig.set_heater_duty(0, 100.0)
        hot = plate0_temp()
        assert hot > cold + 20.0
        rig.set_heater_arm(False)  # disarmed: duty has no thermal effect
        assert plate0_temp() == pytest.approx(cold, abs=0.5)


class TestImuDevice:
    def test_vectors_have_gravity_magnitude(self, rig):
        v = rig.imu_read_vectors()
        ax, ay, az = v["accel_ms2"]
        assert (ax * ax + ay * ay + az * az) ** 0.5 == pytest.approx(9.81, abs=0.5)

    def test_commands_recorded(self, rig):
        rig.imu_command(0x02)
        assert rig.imu.commands[-1] == 0x02

    def test_hundred_hertz_refresh(self, rig):
        a = rig.imu_read_vectors()["accel_ms2"]
        b = rig.imu_read_vectors()["accel_ms2"]  # same 10 ms window: identical
        assert a == b
        rig.clock.sleep_ns(10_000_000)
        c = rig.imu_read_vectors()["accel_ms2"]
        assert c != a
