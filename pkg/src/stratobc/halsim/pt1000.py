"""Platinum-thermistor transfer curve and its inverse.

R(T) = R0 * (1 + A*T + B*T^2) with the standard platinum coefficients,
measured through a resistive divider against a fixed reference rail.
Valid over the qualified range -90..125 degC.
"""

from __future__ import annotations

A = 3.9083e-3
B = -5.775e-7
R0_OHM = 1000.0
VREF_V = 4.75
RREF_OHM = 1000.0

T_MIN_C = -90.0
T_MAX_C = 125.0


class Pt1000RangeError(ValueError):
    pass


def pt1000_resistance(temp_c: float) -> float:
    if not T_MIN_C <= temp_c <= T_MAX_C:
        raise Pt1000RangeError(f"temperature {temp_c} degC outside [{T_MIN_C}, {T_MAX_C}]")
    return R0_OHM * (1.0 + A * temp_c + B * temp_c * temp_c)


def pt1000_voltage(temp_c: float) -> float:
    """Divider tap voltage for a plate at `temp_c`."""
    r = pt1000_resistance(temp_c)
    return VREF_V * r / (r + RREF_OHM)


def pt1000_temp_from_voltage(volts: float) -> float:
    """Invert the divider by bisection; monotone increasing over the range."""
    lo, hi = T_MIN_C, T_MAX_C
    v_lo, v_hi = pt1000_voltage(lo), pt1000_voltage(hi)
    if not v_lo <= volts <= v_hi:
        raise Pt1000RangeError(f"voltage {volts} V outside [{v_lo:.4f}, {v_hi:.4f}]")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if pt1000_voltage(mid) < volts:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
