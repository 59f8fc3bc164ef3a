"""Centre-of-mass and internal-clock state descriptions.

Units are natural throughout (c = hbar = 1): momenta in units of ``m c``,
energies in units of ``m c^2``. A state with ``mass != 1`` is allowed and
the formulas carry ``m`` explicitly, so they stay valid for any consistent
unit choice with ``c = 1``.
"""
from dataclasses import dataclass, field
import math

import numpy as np


def as_vector(p):
    """Promote a scalar momentum to the 1D embedding ``(p, 0, 0)``."""
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.shape == (1,):
        arr = np.array([arr[0], 0.0, 0.0])
    if arr.shape != (3,):
        raise ValueError(f"momentum must be a scalar or a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("momentum components must be finite")
    return arr


@dataclass(frozen=True)
class GaussianPacket:
    """Gaussian momentum wave packet with mean ``pbar`` and spread ``delta``.

    The amplitude along each axis is
    ``pi^(-1/4) delta^(-1/2) exp(-(p - pbar)^2 / (2 delta^2))``.
    """

    pbar: tuple
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "pbar", tuple(as_vector(self.pbar)))
        delta = float(self.delta)
        if not (math.isfinite(delta) and delta > 0):
            raise ValueError(f"delta must be finite and > 0, got {self.delta!r}")
        object.__setattr__(self, "delta", delta)

    @property
    def pvec(self):
        return np.array(self.pbar)

    @property
    def is_1d(self):
        return self.pbar[1] == 0.0 and self.pbar[2] == 0.0

    def amplitude(self, p):
        """1D momentum-space amplitude along the x axis."""
        p = np.asarray(p, dtype=float)
        return np.exp(-((p - self.pbar[0]) ** 2) / (2 * self.delta**2)) / (
            math.pi**0.25 * math.sqrt(self.delta)
        )


@dataclass(frozen=True)
class MomentumSuperposition:
    """``cos(theta)|first> + exp(i phi) sin(theta)|second>``, normalized.

    ``norm`` is derived: ``norm^2 = 1 + cos(phi) sin(2 theta) <first|second>``.
    ``theta`` is accepted on ``[0, pi)`` so that weights such as ``3 pi / 4``
    can be expressed.
    """

    first: GaussianPacket
    second: GaussianPacket
    theta: float
    phi: float = 0.0
    norm: float = field(init=False)

    def __post_init__(self):
        if self.first.delta != self.second.delta:
            raise ValueError("superposed packets must share the same delta")
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")
        if not 0.0 <= self.phi <= math.pi:
            raise ValueError(f"phi must lie in [0, pi], got {self.phi}")
        norm2 = 1.0 + self.interference * packet_overlap(self.first, self.second)
        if not norm2 > 1e-14:
            raise ValueError("superposition has vanishing norm")
        object.__setattr__(self, "norm", math.sqrt(norm2))

    @property
    def delta(self):
        return self.first.delta

    @property
    def interference(self):
        """``cos(phi) sin(2 theta)``, the weight of the cross terms."""
        return math.cos(self.phi) * math.sin(2 * self.theta)

    @property
    def is_1d(self):
        return self.first.is_1d and self.second.is_1d

    def amplitude(self, p):
        """Normalized 1D amplitude (complex) along the x axis."""
        a = math.cos(self.theta) * self.first.amplitude(p)
        b = np.exp(1j * self.phi) * math.sin(self.theta) * self.second.amplitude(p)
        return (a + b) / self.norm


@dataclass(frozen=True)
class ClockFiducial:
    """Gaussian clock wave function of width ``sigma``, centred at 0."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class Scenario:
    """Two clocks A and B sharing one rest mass and one fiducial width.

    ``cm_a`` may be a :class:`GaussianPacket` or a
    :class:`MomentumSuperposition`; ``cm_b`` is always a single packet.
    Values are stored in natural units; :mod:`properclock.units` performs
    any SI conversion before a scenario is built.
    """

    mass: float
    cm_a: object
    cm_b: GaussianPacket
    clock_a: ClockFiducial
    clock_b: ClockFiducial
    units: str = "natural"
    mass_kg: float = None  # SI rest mass, kept for boundary conversion only

    def __post_init__(self):
        if self.units == "si" and not (self.mass_kg and self.mass_kg > 0):
            raise ValueError("SI scenarios need a positive mass_kg")
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError("mass must be finite and > 0")
        if not isinstance(self.cm_a, (GaussianPacket, MomentumSuperposition)):
            raise TypeError("cm_a must be a GaussianPacket or MomentumSuperposition")
        if not isinstance(self.cm_b, GaussianPacket):
            raise TypeError("cm_b must be a GaussianPacket")
        if self.clock_a.sigma != self.clock_b.sigma:
            raise ValueError("both clocks must share the same fiducial width sigma")
        if self.units not in ("natural", "si"):
            raise ValueError(f"units must be 'natural' or 'si', got {self.units!r}")

    @property
    def sigma(self):
        return self.clock_a.sigma

    @property
    def h_a(self):
        return cm_kinetic_energy(self.cm_a, self.mass)

    @property
    def h_b(self):
        return kinetic_energy_mean(self.cm_b, self.mass)


def packet_overlap(a, b):
    """``<a|b> = exp(-|pbar_b - pbar_a|^2 / (4 delta^2))`` for equal spreads."""
    if a.delta != b.delta:
        raise ValueError("overlap is only defined here for packets with equal delta")
    d = a.pvec - b.pvec
    return math.exp(-float(d @ d) / (4 * a.delta**2))


def kinetic_energy_mean(packet, mass=1.0):
    """``<P^2 / 2m> = |pbar|^2 / 2m + delta^2 / 4m``."""
    p = packet.pvec
    return float(p @ p) / (2 * mass) + packet.delta**2 / (4 * mass)


def kinetic_energy_mean_superposition(sup, mass=1.0):
    """Kinetic energy of a normalized two-packet superposition.

    The cross matrix element of ``P^2`` between equal-width packets is
    ``<a|b> (|(pbar_a + pbar_b)/2|^2 + delta^2 / 2)``.
    """
    a, b = sup.first, sup.second
    mid = 0.5 * (a.pvec + b.pvec)
    cross = packet_overlap(a, b) * (float(mid @ mid) / (2 * mass) + sup.delta**2 / (4 * mass))
    c2 = math.cos(sup.theta) ** 2
    s2 = math.sin(sup.theta) ** 2
    num = (
        c2 * kinetic_energy_mean(a, mass)
        + s2 * kinetic_energy_mean(b, mass)
        + sup.interference * cross
    )
    return num / sup.norm**2


def cm_kinetic_energy(state, mass=1.0):
    """Dispatch on packet vs. superposition."""
    if isinstance(state, MomentumSuperposition):
        return kinetic_energy_mean_superposition(state, mass)
    return kinetic_energy_mean(state, mass)


def momentum_density(state, p):
    """1D momentum-space probability density ``|psi(p)|^2`` of a CM state."""
    amp = state.amplitude(p)
    return (amp * np.conj(amp)).real


def momentum_support(state, width=12.0):
    """Interval along x outside which the CM density is negligible."""
    packets = (state.first, state.second) if isinstance(state, MomentumSuperposition) else (state,)
    centres = [pk.pbar[0] for pk in packets]
    pad = width * packets[0].delta
    return min(centres) - pad, max(centres) + pad
