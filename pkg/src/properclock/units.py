"""Conversion between SI values and the natural units used internally.

Internally ``c = hbar = 1`` with the clock particle's rest mass as the unit
of mass, so momenta are in units of ``m c``, energies in ``m c^2`` and
times in ``hbar / (m c^2)``. Conversion happens only at the input/output
boundary.
"""
import math

HBAR = 1.054571817e-34  # J s (exact SI value)
C = 299_792_458.0  # m / s (exact)

RB87_MASS_KG = 1.4e-25
RB87_RADIUS_M = 2.5e-10


def _check_mass(mass_kg):
    if not (math.isfinite(mass_kg) and mass_kg > 0):
        raise ValueError(f"mass_kg must be finite and > 0, got {mass_kg!r}")


def momentum_to_natural(p_si, mass_kg):
    """kg m/s to units of ``m c``."""
    _check_mass(mass_kg)
    return p_si / (mass_kg * C)


def momentum_to_si(p_nat, mass_kg):
    _check_mass(mass_kg)
    return p_nat * mass_kg * C


def time_to_natural(t_s, mass_kg):
    """Seconds to units of ``hbar / (m c^2)``."""
    _check_mass(mass_kg)
    return t_s * mass_kg * C**2 / HBAR


def time_to_si(t_nat, mass_kg):
    _check_mass(mass_kg)
    return t_nat * HBAR / (mass_kg * C**2)


def density_to_si(density_nat, mass_kg):
    """Probability density per natural time unit to density per second."""
    return density_nat * mass_kg * C**2 / HBAR


def momentum_from_velocity(v, mass_kg):
    """Nonrelativistic momentum ``m v`` in kg m/s."""
    _check_mass(mass_kg)
    return mass_kg * v


def momentum_spread_from_radius(r):
    """Momentum spread ``hbar / r`` (kg m/s) of a packet of spatial size ``r``."""
    if not r > 0:
        raise ValueError("radius must be > 0")
    return HBAR / r
