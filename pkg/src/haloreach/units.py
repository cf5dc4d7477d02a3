"""Display-unit conversion table for the Earth-Moon system.

The numerical core works exclusively in canonical units; these constants
exist for reporting and for converting spacecraft specs quoted in SI. The
time unit is approximate at the level of the published system constants.
"""

DU_KM = 384400.0          # Earth-Moon distance unit, km
TU_S = 375190.0           # canonical time unit, s (approximate)
DU_M = DU_KM * 1000.0


def accel_si_to_canonical(a_m_s2):
    """m/s^2 -> DU/TU^2."""
    return a_m_s2 * TU_S * TU_S / DU_M


def accel_canonical_to_si(a_du_tu2):
    """DU/TU^2 -> m/s^2."""
    return a_du_tu2 * DU_M / (TU_S * TU_S)


def length_canonical_to_km(x_du):
    """DU -> km."""
    return x_du * DU_KM


def speed_canonical_to_m_s(v_du_tu):
    """DU/TU -> m/s."""
    return v_du_tu * DU_M / TU_S
