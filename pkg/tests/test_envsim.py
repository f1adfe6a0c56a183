"""Environment profiles: shapes, interpolation, serialization, noise."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratobc.envsim import (
    NoiseChannel,
    Profile,
    ProfileError,
    ProfilePoint,
    make_flight_profile,
    make_tvac_profile,
)


def simple_profile():
    return Profile("p", [
        ProfilePoint(0.0, 900.0, 10.0, 40.0, -3.0, 1000.0),
        ProfilePoint(100.0, 800.0, 0.0, 40.1, -3.1, 2000.0),
    ])


class TestTvacProfile:
    def test_default_descent_duration(self):
        p = make_tvac_profile()
        # (954 - 11) / 10 mbar/min
        assert p.points[1].t_s == pytest.approx(5658.0)
        assert p.points[1].pressure_mbar == 11.0

    def test_one_rate_step_gives_sixty_seconds(self):
        p = make_tvac_profile(start_mbar=21.0, floor_mbar=11.0, rate_mbar_min=10.0)
        assert p.duration_s == pytest.approx(60.0)

    def test_ramp_up_returns_to_ground(self):
        p = make_tvac_profile(ramp_up=True)
        assert p.points[-1].pressure_mbar == pytest.approx(954.0)

    def test_midpoint_of_default_descent(self):
        p = make_tvac_profile()
        assert p.sample(2829.0).pressure_mbar == pytest.approx(482.5)

    def test_bad_parameters(self):
        with pytest.raises(ProfileError):
            make_tvac_profile(start_mbar=10.0, floor_mbar=11.0)
        with pytest.raises(ProfileError):
            make_tvac_profile(rate_mbar_min=0.0)


class TestFlightProfile:
    def test_starts_at_ground_pressure(self):
        assert make_flight_profile().sample(0.0).pressure_mbar == pytest.approx(954.0)

    def test_float_pressure_after_three_hours(self):
        assert make_flight_profile().sample(3 * 3600.0).pressure_mbar <= 21.5

    def test_clamps_beyond_end(self):
        p = make_flight_profile()
        end = p.points[-1]
        s = p.sample(p.duration_s + 9999.0)
        assert s.pressure_mbar == end.pressure_mbar

    def test_track_drifts_from_origin(self):
        p = make_flight_profile()
        assert p.sample(5000.0).lon_deg != p.sample(0.0).lon_deg


class TestSampling:
    def test_exact_at_knots(self):
        p = simple_profile()
        for knot in p.points:
            assert p.sample(knot.t_s) == knot

    def test_linear_midpoint(self):
        p = simple_profile()
        assert p.sample(50.0).pressure_mbar == pytest.approx(850.0)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            simple_profile().sample(-1.0)

    @settings(max_examples=200, deadline=None)
    @given(t=st.floats(0.0, 100.0, allow_nan=False))
    def test_continuity_within_slope_bound(self, t):
        p = simple_profile()
        eps = 1e-3  # 1 ms
        slope = abs(800.0 - 900.0) / 100.0
        a = p.sample(t).pressure_mbar
        b = p.sample(min(t + eps, 100.0)).pressure_mbar
        assert abs(b - a) <= slope * eps + 1e-9

    def test_validation(self):
        with pytest.raises(ProfileError):
            Profile("short", [ProfilePoint(0, 900, 0, 0, 0, 0)])
        with pytest.raises(ProfileError):
            Profile("order", [ProfilePoint(0, 900, 0, 0, 0, 0),
                              ProfilePoint(0, 800, 0, 0, 0, 0)])
        with pytest.raises(ProfileError):
            Profile("neg", [ProfilePoint(0, 900, 0, 0, 0, 0),
                            ProfilePoint(1, -5, 0, 0, 0, 0)])


class TestSerialization:
    def test_csv_roundtrip(self, tmp_path):
        p = make_tvac_profile(hold_s=100.0, ramp_up=True)
        path = tmp_path / "profile.csv"
        p.to_csv(path)
        q = Profile.from_csv(path)
        assert [x.pressure_mbar for x in q.points] == pytest.approx(
            [x.pressure_mbar for x in p.points])

    def test_identical_config_gives_byte_identical_csv(self):
        a = make_flight_profile().to_csv()
        b = make_flight_profile().to_csv()
        assert a == b


class TestNoise:
    def test_same_seed_same_stream(self):
        a = NoiseChannel(7, "x", 0.1)
        b = NoiseChannel(7, "x", 0.1)
        assert [a.draw() for _ in range(50)] == [b.draw() for _ in range(50)]

    def test_different_tags_differ(self):
        a = NoiseChannel(7, "x", 0.1)
        b = NoiseChannel(7, "y", 0.1)
        assert [a.draw() for _ in range(10)] != [b.draw() for _ in range(10)]

    def test_clip_bounds_every_draw(self):
        ch = NoiseChannel(3, "clip", 1.0, clip=0.2)
        assert all(abs(ch.draw()) <= 0.2 for _ in range(2000))

    def test_zero_sigma_is_silent(self):
        assert NoiseChannel(1, "z", 0.0).draw() == 0.0
