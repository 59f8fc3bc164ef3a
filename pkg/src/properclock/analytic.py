"""Closed-form leading-order results for two relativistic clocks.

All energies are in units of ``m c^2`` (``c = 1``); ``h_a`` and ``h_b`` are
the mean non-relativistic kinetic energies of the two centres of mass.
"""
from dataclasses import dataclass
import logging
import math
import warnings

import numpy as np

from .states import GaussianPacket, MomentumSuperposition

log = logging.getLogger(__name__)

_SQRT_2PI = math.sqrt(2 * math.pi)


def _dilation_parameter(h_a, h_b, mass):
    k = (h_a - h_b) / mass
    if abs(k) > 0.1:
        warnings.warn(
            f"|<H_A> - <H_B>| / mc^2 = {abs(k):.3g} is outside the perturbative regime",
            RuntimeWarning,
            stacklevel=3,
        )
    return k


def conditional_density(tau_a, tau_b, sigma, h_a, h_b, mass=1.0):
    """Density of clock A reading ``tau_a`` given clock B reads ``tau_b``.

    Gaussian of width ``sigma`` about ``tau_b`` times the first-order bracket
    ``1 + k/2 (1 - (tau_a^2 - tau_b^2) / sigma^2)``, ``k = (h_a - h_b)/m``.
    Far tails can go negative; see :func:`validity_radius`.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    k = _dilation_parameter(h_a, h_b, mass)
    tau_a = np.asarray(tau_a, dtype=float)
    gauss = np.exp(-((tau_a - tau_b) ** 2) / (2 * sigma**2)) / (_SQRT_2PI * sigma)
    out = gauss * (1.0 + 0.5 * k * (1.0 - (tau_a**2 - tau_b**2) / sigma**2))
    return out if out.ndim else float(out)


def validity_radius(tau_b, sigma, h_a, h_b, mass=1.0):
    """Half-width about ``tau_b`` inside which the density is non-negative.

    Returns ``inf`` when the bracket never changes sign.
    """
    k = (h_a - h_b) / mass
    if k == 0.0:
        return math.inf
    # bracket zero: tau_a^2 = tau_b^2 + sigma^2 (1 + 2/k)
    r2 = tau_b**2 + sigma**2 * (1.0 + 2.0 / k)
    if r2 < 0:
        return math.inf
    return abs(math.sqrt(r2) - abs(tau_b))


def mean_tau(tau_b, sigma, h_a, h_b, mass=1.0):
    """``<T_A> = (1 - (h_a - h_b)/m) tau_b``."""
    return (1.0 - (h_a - h_b) / mass) * tau_b


def variance_tau(sigma, h_a, h_b, mass=1.0):
    """Leading-order spread ``(1 - (h_a - h_b)/m) sigma^2``.

    The printed density's exact central second moment is
    :func:`density_central_variance`; the two differ by ``k^2 tau_b^2``,
    which is beyond the order the density itself is accurate to.
    """
    return (1.0 - (h_a - h_b) / mass) * sigma**2


def density_central_variance(tau_b, sigma, h_a, h_b, mass=1.0):
    """Exact second central moment of :func:`conditional_density`."""
    k = (h_a - h_b) / mass
    return (1.0 - k) * sigma**2 - (k * tau_b) ** 2


def classical_dilation(pbar_a, pbar_b, mass=1.0):
    """Classical ratio ``tau_A / tau_B`` for point clocks with momenta.

    Returns ``(leading, exact)`` where ``leading = 1 - (p_A^2 - p_B^2)/2m^2``
    and ``exact = gamma_B / gamma_A`` with ``gamma = sqrt(1 + p^2/m^2)``.
    """
    pa = np.atleast_1d(np.asarray(pbar_a, dtype=float))
    pb = np.atleast_1d(np.asarray(pbar_b, dtype=float))
    pa2 = float(pa @ pa) / mass**2
    pb2 = float(pb @ pb) / mass**2
    leading = 1.0 - (pa2 - pb2) / 2.0
    exact = math.sqrt(1.0 + pb2) / math.sqrt(1.0 + pa2)
    return leading, exact


@dataclass(frozen=True)
class DilationFactors:
    gamma_c_inv: float
    gamma_q_inv: float

    @property
    def total(self):
        return self.gamma_c_inv + self.gamma_q_inv


def gamma_c_inv(sup, cm_b, mass=1.0):
    """Mixture (classical) part of the mean dilation of clock A."""
    m2 = mass**2
    pa, pa_ = sup.first.pvec, sup.second.pvec
    pb = cm_b.pvec
    c2, s2 = math.cos(sup.theta) ** 2, math.sin(sup.theta) ** 2
    kin = (c2 * (pa @ pa) + s2 * (pa_ @ pa_) - pb @ pb) / (2 * m2)
    spread = (sup.delta**2 - cm_b.delta**2) / (4 * m2)
    return float(1.0 - kin - spread)


def gamma_q_inv(sup, mass=1.0):
    """Interference (quantum) part of the mean dilation of clock A."""
    s = sup.interference
    if s == 0.0:
        return 0.0
    pa, pa_ = sup.first.pvec, sup.second.pvec
    d = pa_ - pa
    d2 = float(d @ d)
    if d2 == 0.0:
        return 0.0
    x = d2 / (4 * sup.delta**2)
    if x > 700.0:
        # exp overflows; the ratio has already underflowed to zero
        return 0.0
    num = s * (d2 - 2.0 * float(pa_ @ pa_ - pa @ pa) * math.cos(2 * sup.theta))
    return num / (8 * mass**2 * (s + math.exp(x)))


def dilation_factors(cm_a, cm_b, mass=1.0):
    """Classical and quantum dilation factors for clock A relative to B.

    A plain :class:`GaussianPacket` for ``cm_a`` is treated as the
    ``theta = 0`` superposition.
    """
    if isinstance(cm_a, GaussianPacket):
        cm_a = MomentumSuperposition(cm_a, cm_a, 0.0, 0.0)
    if not isinstance(cm_a, MomentumSuperposition):
        raise TypeError("cm_a must be a GaussianPacket or MomentumSuperposition")
    return DilationFactors(gamma_c_inv(cm_a, cm_b, mass), gamma_q_inv(cm_a, mass))


def gamma_q_inv_1d(dp, ptot, theta, phi, delta, mass=1.0):
    """Vectorised :func:`gamma_q_inv` for collinear packets.

    ``dp = pbar' - pbar`` and ``ptot = pbar' + pbar`` (units of ``m c``).
    Array arguments broadcast.
    """
    dp, ptot, theta, phi = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (dp, ptot, theta, phi))
    )
    s = np.cos(phi) * np.sin(2 * theta)
    x = dp**2 / (4 * delta**2)
    with np.errstate(over="ignore"):
        denom = 8 * mass**2 * (s + np.exp(x))
    # p'^2 - p^2 = dp * ptot
    num = s * (dp**2 - 2 * dp * ptot * np.cos(2 * theta))
    out = np.where(np.isinf(denom), 0.0, num / np.where(np.isinf(denom), 1.0, denom))
    return out


def gamma_c_inv_1d(dp, ptot, theta, delta, pb=0.0, delta_b=None, mass=1.0):
    """Vectorised :func:`gamma_c_inv` for collinear packets."""
    delta_b = delta if delta_b is None else delta_b
    dp, ptot, theta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (dp, ptot, theta)))
    pa = 0.5 * (ptot - dp)
    pa_ = 0.5 * (ptot + dp)
    kin = (pa**2 * np.cos(theta) ** 2 + pa_**2 * np.sin(theta) ** 2 - pb**2) / (2 * mass**2)
    return 1.0 - kin - (delta**2 - delta_b**2) / (4 * mass**2)


@dataclass(frozen=True)
class ConditionalDistribution:
    """Sampled conditional density with its trapezoidal moments."""

    tau_b: float
    tau_grid: np.ndarray
    density: np.ndarray
    mean: float
    variance: float

    @classmethod
    def from_samples(cls, tau_b, tau_grid, density):
        tau_grid = np.asarray(tau_grid, dtype=float)
        density = np.asarray(density, dtype=float)
        if tau_grid.shape != density.shape or tau_grid.ndim != 1 or tau_grid.size < 2:
            raise ValueError("tau_grid and density must be equal-length 1D arrays")
        if np.any(np.diff(tau_grid) <= 0):
            raise ValueError("tau_grid must be strictly increasing")
        mass = np.trapezoid(density, tau_grid)
        mean = np.trapezoid(tau_grid * density, tau_grid) / mass
        var = np.trapezoid((tau_grid - mean) ** 2 * density, tau_grid) / mass
        return cls(float(tau_b), tau_grid, density, float(mean), float(var))

    @property
    def total(self):
        return float(np.trapezoid(self.density, self.tau_grid))


def conditional_distribution(tau_b, tau_grid, sigma, h_a, h_b, mass=1.0):
    """Sample :func:`conditional_density` on ``tau_grid``."""
    dens = conditional_density(np.asarray(tau_grid, dtype=float), tau_b, sigma, h_a, h_b, mass)
    return ConditionalDistribution.from_samples(tau_b, tau_grid, dens)
