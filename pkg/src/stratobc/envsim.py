"""Deterministic environment truth: pressure/temperature/position over mission time.

Profiles are immutable piecewise-linear tables sampled by interpolation and
clamped beyond their endpoints, so evaluation is safe from any task. Sensor
noise lives in seeded per-channel generators layered on top by the simulated
instruments, never in the truth profile itself.
"""

from __future__ import annotations

import csv
import io
import random
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


@dataclass(frozen=True)
class ProfilePoint:
    t_s: float
    pressure_mbar: float
    temp_c: float
    lat_deg: float
    lon_deg: float
    alt_m: float


class ProfileError(ValueError):
    pass


class Profile:
    """Ordered knots with piecewise-linear interpolation between them."""

    def __init__(self, name: str, points: Sequence[ProfilePoint]):
        if len(points) < 2:
            raise ProfileError("a profile needs at least two points")
        for a, b in zip(points, points[1:]):
            if b.t_s <= a.t_s:
                raise ProfileError(f"profile times must strictly increase at t={b.t_s}")
        for p in points:
            if p.pressure_mbar <= 0:
                raise ProfileError(f"pressure must be positive at t={p.t_s}")
        self.name = name
        self._points = tuple(points)
        self._times = tuple(p.t_s for p in points)

    @property
    def points(self) -> tuple[ProfilePoint, ...]:
        return self._points

    @property
    def duration_s(self) -> float:
        return self._times[-1]

    def sample(self, t_s: float) -> ProfilePoint:
        """Interpolated point at `t_s`; exact at knots, clamped outside."""
        if t_s < 0:
            raise ValueError(f"t must be >= 0, got {t_s}")
        pts, times = self._points, self._times
        if t_s <= times[0]:
            return pts[0]
        if t_s >= times[-1]:
            return pts[-1]
        hi = bisect_right(times, t_s)
        a, b = pts[hi - 1], pts[hi]
        if t_s == a.t_s:
            return a
        u = (t_s - a.t_s) / (b.t_s - a.t_s)

        def lerp(x: float, y: float) -> float:
            return x + (y - x) * u

        return ProfilePoint(
            t_s=t_s,
            pressure_mbar=lerp(a.pressure_mbar, b.pressure_mbar),
            temp_c=lerp(a.temp_c, b.temp_c),
            lat_deg=lerp(a.lat_deg, b.lat_deg),
            lon_deg=lerp(a.lon_deg, b.lon_deg),
            alt_m=lerp(a.alt_m, b.alt_m),
        )

    def pressure(self, t_s: float) -> float:
        return self.sample(t_s).pressure_mbar

    # -- serialization ------------------------------------------------------

    CSV_HEADER = ("t_s", "pressure_mbar", "temp_c", "lat", "lon", "alt_m")

    def to_csv(self, target: Path | io.TextIOBase | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for p in self._points:
            writer.writerow(
                [f"{p.t_s:.6f}", f"{p.pressure_mbar:.6f}", f"{p.temp_c:.4f}",
                 f"{p.lat_deg:.7f}", f"{p.lon_deg:.7f}", f"{p.alt_m:.2f}"]
            )
        text = buf.getvalue()
        if isinstance(target, (str, Path)):
            Path(target).write_text(text)
        elif target is not None:
            target.write(text)
        return text

    @classmethod
    def from_csv(cls, source: Path | str, name: str | None = None) -> "Profile":
        from stratobc.fsutil import read_text_or_literal

        text, stem = read_text_or_literal(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != cls.CSV_HEADER:
            raise ProfileError(f"bad profile CSV header: {rows[0] if rows else 'empty'}")
        points = [
            ProfilePoint(float(r[0]), float(r[1]), float(r[2]),
                         float(r[3]), float(r[4]), float(r[5]))
            for r in rows[1:]
        ]
        return cls(name or stem or "profile", points)


# ---------------------------------------------------------------------------
# Synthetic atmosphere helpers

GROUND_PRESSURE_MBAR = 954.0
REFERENCE_LAT = 40.437700
REFERENCE_LON = -3.672524


def altitude_from_pressure(p_mbar: float) -> float:
    """Barometric-formula altitude, good enough for synthetic truth."""
    return 44330.0 * (1.0 - (p_mbar / 1013.25) ** 0.1903)


def temp_from_altitude(alt_m: float) -> float:
    """Two-segment lapse model: linear cooling to the tropopause, then flat."""
    if alt_m <= 11000.0:
        return 20.0 - 76.0 * (alt_m / 11000.0)
    return -56.0


def _point(t_s: float, p_mbar: float, lat: float, lon: float) -> ProfilePoint:
    alt = altitude_from_pressure(p_mbar)
    return ProfilePoint(t_s, p_mbar, temp_from_altitude(alt), lat, lon, alt)


def make_tvac_profile(
    start_mbar: float = GROUND_PRESSURE_MBAR,
    floor_mbar: float = 11.0,
    rate_mbar_min: float = 10.0,
    hold_s: float = 0.0,
    ramp_up: bool = False,
) -> Profile:
    """Vacuum-chamber pump-down: linear descent, optional floor hold and
    symmetric ramp back to the start pressure. Position is pinned to the
    reference fix (the chamber does not move)."""
    if not (start_mbar > floor_mbar > 0):
        raise ProfileError("need start > floor > 0")
    if rate_mbar_min <= 0:
        raise ProfileError("rate must be positive")
    descent_s = (start_mbar - floor_mbar) / rate_mbar_min * 60.0
    lat, lon = REFERENCE_LAT, REFERENCE_LON
    pts = [_point(0.0, start_mbar, lat, lon), _point(descent_s, floor_mbar, lat, lon)]
    t = descent_s
    if hold_s > 0:
        t += hold_s
        pts.append(_point(t, floor_mbar, lat, lon))
    if ramp_up:
        t += descent_s
        pts.append(_point(t, start_mbar, lat, lon))
    return Profile("tvac", pts)


def make_flight_profile(
    ascent_s: float = 5400.0,
    float_s: float = 12600.0,
    descent_s: float = 1800.0,
    ground_mbar: float = GROUND_PRESSURE_MBAR,
    float_mbar: float = 21.5,
    origin_lat: float = REFERENCE_LAT,
    origin_lon: float = REFERENCE_LON,
    drift_deg_per_s: float = 2.0e-5,
) -> Profile:
    """Nominal flight shape: ground, ~1.5 h ascent to float pressure, float
    slightly below the threshold, then a sharp descent with an initially
    fast pressure rise. The track drifts slowly east from the origin."""

    def lat(t: float) -> float:
        return origin_lat + drift_deg_per_s * 0.2 * t

    def lon(t: float) -> float:
        return origin_lon + drift_deg_per_s * t

    # Ascent knots roughly follow the exponential thinning of the atmosphere.
    ascent_knots = [
        (0.00, ground_mbar),
        (0.05, 890.0),
        (0.20, 650.0),
        (0.40, 380.0),
        (0.60, 180.0),
        (0.80, 65.0),
        (1.00, float_mbar),
    ]
    pts = [_point(f * ascent_s, p, lat(f * ascent_s), lon(f * ascent_s))
           for f, p in ascent_knots]
    t_float_end = ascent_s + float_s
    pts.append(_point(t_float_end, float_mbar - 1.0, lat(t_float_end), lon(t_float_end)))
    # Descent: fast initial rise (cut-off signature), then to ground.
    t1 = t_float_end + 0.3 * descent_s
    pts.append(_point(t1, 150.0, lat(t1), lon(t1)))
    t2 = t_float_end + descent_s
    pts.append(_point(t2, ground_mbar, lat(t2), lon(t2)))
    return Profile("flight", pts)


class NoiseChannel:
    """Seeded Gaussian noise with a hard clip, one independent stream per
    channel so draw order elsewhere cannot perturb it."""

    def __init__(self, seed: int, tag: str, sigma: float, clip: float | None = None):
        self._rng = random.Random(f"{seed}:{tag}")
        self.sigma = sigma
        self.clip = clip

    def draw(self) -> float:
        if self.sigma <= 0:
            return 0.0
        x = self._rng.gauss(0.0, self.sigma)
        if self.clip is not None:
            x = max(-self.clip, min(self.clip, x))
        return x
