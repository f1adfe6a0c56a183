"""NMEA 0183 sentence generation and parsing (GGA and RMC only).

Checksum is the XOR of every character between '$' and '*', rendered as two
uppercase hex digits. Latitude is ddmm.mmmmm, longitude dddmm.mmmmm; five
decimal minute digits keep sub-microdegree round-trips exact enough for the
fix comparisons done downstream.
"""

from __future__ import annotations

from dataclasses import dataclass


class NmeaError(ValueError):
    pass


class ChecksumError(NmeaError):
    pass


def checksum(body: str) -> int:
    c = 0
    for ch in body:
        c ^= ord(ch)
    return c


def make_sentence(body: str) -> str:
    return f"${body}*{checksum(body):02X}\r\n"


def _fmt_lat(lat_deg: float) -> tuple[str, str]:
    hemi = "N" if lat_deg >= 0 else "S"
    mag = abs(lat_deg)
    deg = int(mag)
    minutes = (mag - deg) * 60.0
    return f"{deg:02d}{minutes:08.5f}", hemi


def _fmt_lon(lon_deg: float) -> tuple[str, str]:
    hemi = "E" if lon_deg >= 0 else "W"
    mag = abs(lon_deg)
    deg = int(mag)
    minutes = (mag - deg) * 60.0
    return f"{deg:03d}{minutes:08.5f}", hemi


def _fmt_time(utc_s: float) -> str:
    s = utc_s % 86400.0
    h = int(s // 3600)
    m = int((s % 3600) // 60)
    sec = s % 60.0
    return f"{h:02d}{m:02d}{sec:05.2f}"


def make_gga(utc_s: float, lat_deg: float, lon_deg: float, alt_m: float,
             quality: int = 1, num_sv: int = 8, hdop: float = 0.9) -> str:
    lat, ns = _fmt_lat(lat_deg)
    lon, ew = _fmt_lon(lon_deg)
    body = (
        f"GPGGA,{_fmt_time(utc_s)},{lat},{ns},{lon},{ew},"
        f"{quality},{num_sv:02d},{hdop:.1f},{alt_m:.1f},M,0.0,M,,"
    )
    return make_sentence(body)


def make_rmc(utc_s: float, lat_deg: float, lon_deg: float,
             speed_kn: float = 0.0, course_deg: float = 0.0,
             date: str = "250923") -> str:
    lat, ns = _fmt_lat(lat_deg)
    lon, ew = _fmt_lon(lon_deg)
    body = (
        f"GPRMC,{_fmt_time(utc_s)},A,{lat},{ns},{lon},{ew},"
        f"{speed_kn:.2f},{course_deg:.1f},{date},,,A"
    )
    return make_sentence(body)


@dataclass(frozen=True)
class GgaFix:
    utc_s: float
    lat_deg: float
    lon_deg: float
    alt_m: float
    quality: int
    num_sv: int


@dataclass(frozen=True)
class RmcFix:
    utc_s: float
    lat_deg: float
    lon_deg: float
    speed_kn: float
    valid: bool


def _parse_angle(field: str, hemi: str, deg_digits: int) -> float:
    deg = int(field[:deg_digits])
    minutes = float(field[deg_digits:])
    value = deg + minutes / 60.0
    return -value if hemi in ("S", "W") else value


def _parse_time(field: str) -> float:
    return int(field[0:2]) * 3600 + int(field[2:4]) * 60 + float(field[4:])


def parse_sentence(line: str) -> GgaFix | RmcFix | None:
    """Parse one sentence; raises NmeaError on malformed input or bad
    checksum, returns None for valid sentences of uninteresting types."""
    line = line.strip()
    if not line.startswith("$") or "*" not in line:
        raise NmeaError(f"not an NMEA sentence: {line[:24]!r}")
    body, _, tail = line[1:].partition("*")
    if len(tail) < 2:
        raise NmeaError("truncated checksum")
    try:
        declared = int(tail[:2], 16)
    except ValueError:
        raise NmeaError(f"bad checksum field {tail[:2]!r}") from None
    if checksum(body) != declared:
        raise ChecksumError(
            f"checksum mismatch: computed {checksum(body):02X}, declared {declared:02X}"
        )
    fields = body.split(",")
    talker = fields[0]
    try:
        if talker.endswith("GGA"):
            return GgaFix(
                utc_s=_parse_time(fields[1]),
                lat_deg=_parse_angle(fields[2], fields[3], 2),
                lon_deg=_parse_angle(fields[4], fields[5], 3),
                alt_m=float(fields[9]),
                quality=int(fields[6]),
                num_sv=int(fields[7]),
            )
        if talker.endswith("RMC"):
            return RmcFix(
                utc_s=_parse_time(fields[1]),
                lat_deg=_parse_angle(fields[3], fields[4], 2),
                lon_deg=_parse_angle(fields[5], fields[6], 3),
                speed_kn=float(fields[7]) if fields[7] else 0.0,
                valid=fields[2] == "A",
            )
    except (IndexError, ValueError) as exc:
        raise NmeaError(f"malformed {talker} sentence: {exc}") from None
    return None
