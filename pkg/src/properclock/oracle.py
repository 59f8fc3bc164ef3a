"""Numerical reference engines for the conditional clock-reading density.

Two independent routes:

* :func:`leading_order_density` integrates the first-order per-clock
  t-integrands over coordinate time and combines the pieces at strict first
  order, mirroring how the closed form is obtained.
* :func:`nonperturbative_density` evolves each clock in the joint
  (momentum, clock-energy) eigenbasis with the exact dispersion
  ``E(p, k) = sqrt(p^2 + (m + k)^2)``, so no time stepping is involved and
  the only discretisation is the grid itself.

Both restrict to Minkowski space and to the 1D momentum embedding
``pbar = (p, 0, 0)``.
"""
from dataclasses import dataclass, replace
import logging
import math

import numpy as np

from . import kernels
from .analytic import ConditionalDistribution
from .quadrature import QuadratureError, QuadratureSpec, integrate
from .states import MomentumSuperposition, momentum_density, momentum_support

log = logging.getLogger(__name__)

WINDOW_PAD = 12.0  # default t-window padding, units of sigma
_EPS = np.finfo(float).eps


class GridError(ValueError):
    """Spectral grid fails a resolution or boundary-leakage requirement."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def default_window(tau_a, tau_b, sigma, pad=WINDOW_PAD):
    tau_a = np.atleast_1d(tau_a)
    lo = min(float(tau_a.min()), tau_b) - pad * sigma
    hi = max(float(tau_a.max()), tau_b) + pad * sigma
    return lo, hi


def _resolve_window(quad, tau_a, tau_b, sigma, integrand):
    """Pick the t-window and make sure it does not truncate the integrand.

    The integrand is probed at the window edges and at its interior peak
    region; edges above 1e-30 of the peak count as truncation.
    """
    if quad.t_window is None:
        lo, hi = default_window(tau_a, tau_b, sigma)
    else:
        lo, hi = quad.t_window
    tau_a = np.atleast_1d(tau_a)
    centres = np.concatenate([tau_a, 0.5 * (tau_a + tau_b), [tau_b]])
    probe = np.clip(centres, lo, hi)
    peak = np.abs(integrand(probe)).max()
    for _ in range(64):
        edge = np.abs(integrand(np.array([lo, hi]))).max()
        if edge <= 1e-30 * peak:
            return lo, hi
        if not quad.auto_extend:
            raise QuadratureError(
                "t-window truncates the integrand",
                window=(lo, hi),
                edge_to_peak=float(edge / peak) if peak > 0 else math.inf,
            )
        lo -= 4 * sigma
        hi += 4 * sigma
        log.debug("extending t-window to (%g, %g)", lo, hi)
    raise QuadratureError("could not find a non-truncating t-window", window=(lo, hi))


def _check_1d(scenario):
    for state in (scenario.cm_a, scenario.cm_b):
        if not state.is_1d:
            raise ValueError("numerical engines require momenta along x: pbar = (p, 0, 0)")


# -- leading-order t-quadrature -------------------------------------------

def leading_order_density(scenario, tau_a, tau_b, quad=None, full_output=False):
    """First-order conditional density by explicit coordinate-time quadrature.

    Parameters
    ----------
    scenario : Scenario
    tau_a : float or array
        Readings of clock A.
    tau_b : float
        Reading of clock B that is conditioned on.
    quad : QuadratureSpec, optional
    full_output : bool
        If True also return the propagated error estimate and the
        non-expanded ratio (numerator / denominator without the first-order
        division), as ``(density, error, ratio)``.
    """
    _check_1d(scenario)
    quad = quad or QuadratureSpec()
    scalar = np.ndim(tau_a) == 0
    tau_a = np.atleast_1d(np.asarray(tau_a, dtype=float))
    sigma = scenario.sigma
    ka = scenario.h_a / scenario.mass
    kb = scenario.h_b / scenario.mass
    na = tau_a.size

    def terms(t):
        return kernels.leading_order_terms(np.ascontiguousarray(t, dtype=float), tau_a, float(tau_b), sigma)

    lo, hi = _resolve_window(quad, tau_a, tau_b, sigma, terms)
    res = integrate(
        terms, lo, hi, quad.rel_tol, quad.abs_tol, quad.max_subdivisions, quad.initial_panels
    )
    v, e = res.value, res.error
    n00, n10, n01, n11 = (v[i * na:(i + 1) * na] for i in range(4))
    d0, d1 = v[4 * na], v[4 * na + 1]
    e00, e10, e01 = (e[i * na:(i + 1) * na] for i in range(3))
    ed0, ed1 = e[4 * na], e[4 * na + 1]

    density = n00 / d0 + ka * n10 / d0 + kb * (n01 / d0 - n00 * d1 / d0**2)
    err = (
        e00 / d0
        + abs(ka) * e10 / d0
        + abs(kb) * (e01 / d0 + e00 * abs(d1) / d0**2 + np.abs(n00) * ed1 / d0**2)
        + np.abs(density) * ed0 / d0
    )
    if not full_output:
        return float(density[0]) if scalar else density
    ratio = (n00 + ka * n10 + kb * n01 + ka * kb * n11) / (d0 + kb * d1)
    if scalar:
        return float(density[0]), float(err[0]), float(ratio[0])
    return density, err, ratio


# -- exact-dispersion spectral engine -------------------------------------

@dataclass(frozen=True)
class SpectralGrid:
    """Discretisation of the clock energy axis and the CM momentum axis.

    The clock lives on a periodic reading interval of half-width
    ``tau_extent * sigma`` sampled by ``n_tau`` points; its energy grid is
    the conjugate FFT grid. ``n_p`` momentum points cover
    ``centre +- p_extent`` (units of ``m c``). ``None`` picks the smallest
    admissible value for the state at hand.
    """

    n_tau: int = 512
    tau_extent: float = 16.0
    n_p: int = None
    p_extent: float = None

    def __post_init__(self):
        for name in ("n_tau", "n_p"):
            n = getattr(self, name)
            if n is None:
                continue
            if n < 64 or n & (n - 1):
                raise ValueError(f"{name} must be a power of two >= 64, got {n}")
        if not self.tau_extent > 0:
            raise ValueError("tau_extent must be > 0")
        if self.p_extent is not None and not self.p_extent > 0:
            raise ValueError("p_extent must be > 0")

    def refined(self):
        return replace(
            self,
            n_tau=2 * self.n_tau,
            n_p=None if self.n_p is None else 2 * self.n_p,
        )


@dataclass
class _ClockModes:
    k: np.ndarray          # retained clock energies
    coeffs: np.ndarray     # fiducial amplitudes on those energies
    half_width: float      # periodic reading half-interval
    p: np.ndarray
    weights: np.ndarray    # density(p) * dp
    phase_rate: np.ndarray  # E(p, k) - E(p, 0)

    def basis(self, tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.exp(1j * np.outer(self.k, tau)) / math.sqrt(2 * self.half_width)

    def density(self, tau, t, basis=None):
        basis = self.basis(tau) if basis is None else basis
        return kernels.spectral_clock_density(
            self.phase_rate, self.coeffs, basis, self.weights, np.atleast_1d(np.asarray(t, dtype=float))
        )


def _clock_modes(state, sigma, mass, grid, n_p_auto_factor=1):
    n = grid.n_tau
    if n / (2 * grid.tau_extent) < 16:
        raise GridError(
            "clock grid under-resolves the fiducial (need >= 16 points per sigma)",
            points_per_sigma=n / (2 * grid.tau_extent),
        )
    half_width = grid.tau_extent * sigma
    if math.exp(-grid.tau_extent**2) > 1e-12:
        raise GridError(
            "fiducial density at the reading-grid boundary exceeds 1e-12",
            tau_extent=grid.tau_extent,
        )
    dtau = 2 * half_width / n
    k = 2 * np.pi * np.fft.fftfreq(n, dtau)
    k = np.sort(k)
    amp = np.exp(-0.5 * (k * sigma) ** 2)
    keep = amp > 1e-18 * amp.max()
    k = k[keep]
    if np.abs(k).max() >= 0.5 * mass:
        # m + k must stay well away from zero for the dispersion to be physical
        raise GridError(
            "clock energy spread is not small compared with the rest mass (sigma too small)",
            max_clock_energy=float(np.abs(k).max()),
            sigma=sigma,
        )
    coeffs = amp[keep].astype(complex)
    coeffs /= np.linalg.norm(coeffs)

    delta = state.first.delta if isinstance(state, MomentumSuperposition) else state.delta
    lo, hi = momentum_support(state)
    centre = 0.5 * (lo + hi)
    p_ext = 0.5 * (hi - lo) if grid.p_extent is None else grid.p_extent
    if grid.n_p is None:
        n_p = 64
        while 2 * p_ext / (n_p - 1) > delta / 16:
            n_p *= 2
        n_p *= n_p_auto_factor
    else:
        n_p = grid.n_p
    p = np.linspace(centre - p_ext, centre + p_ext, n_p)
    dp = p[1] - p[0]
    if dp > delta / 16:
        raise GridError(
            "momentum grid under-resolves the packet (need >= 16 points per delta)",
            points_per_delta=delta / dp,
        )
    dens = momentum_density(state, p)
    edge = max(dens[0], dens[-1]) / dens.max()
    if edge > 1e-12:
        raise GridError("momentum density at the grid boundary exceeds 1e-12", edge_to_peak=float(edge))
    weights = dens * dp
    weights[[0, -1]] *= 0.5

    e0 = np.sqrt(p**2 + mass**2)[:, None]
    ek = np.sqrt(p[:, None] ** 2 + (mass + k[None, :]) ** 2)
    # (E_k^2 - E_0^2) / (E_k + E_0) avoids cancellation at small k
    phase_rate = k[None, :] * (2 * mass + k[None, :]) / (ek + e0)
    return _ClockModes(k, coeffs, half_width, p, weights, np.ascontiguousarray(phase_rate))


def _check_aliasing(modes, lo, hi, tau_a, tau_b, sigma):
    """Reject grids whose periodic clock images reach the integrand.

    Clock A only matters where clock B's factor is non-negligible
    (``|t - tau_b| <= 9 sigma``); clock B matters over the whole window.
    """
    t_lo, t_hi = max(lo, tau_b - 9 * sigma), min(hi, tau_b + 9 * sigma)
    reach_a = max(abs(t_hi - np.min(tau_a)), abs(np.max(tau_a) - t_lo))
    reach_b = max(abs(hi - tau_b), abs(tau_b - lo))
    gap = 2 * modes.half_width - max(reach_a, reach_b)
    if gap < 0 or math.exp(-(gap / sigma) ** 2) > 1e-16:
        raise GridError(
            "periodic images of the clock leak into the t-window; increase tau_extent",
            reach_over_sigma=max(reach_a, reach_b) / sigma,
            box_over_sigma=2 * modes.half_width / sigma,
        )


def _nonperturbative_once(scenario, tau_a, tau_b, grid, quad, n_p_auto_factor=1):
    sigma, mass = scenario.sigma, scenario.mass
    ma = _clock_modes(scenario.cm_a, sigma, mass, grid, n_p_auto_factor)
    mb = _clock_modes(scenario.cm_b, sigma, mass, grid, n_p_auto_factor)
    basis_a = ma.basis(tau_a)
    basis_b = mb.basis([tau_b])

    def integrand(t):
        t = np.ascontiguousarray(np.atleast_1d(t), dtype=float)
        fa = ma.density(None, t, basis_a)
        fb = mb.density(None, t, basis_b)
        return np.concatenate([fa * fb, fb], axis=1)

    lo, hi = _resolve_window(quad, tau_a, tau_b, sigma, integrand)
    _check_aliasing(ma, lo, hi, tau_a, tau_b, sigma)
    res = integrate(
        integrand, lo, hi, quad.rel_tol, quad.abs_tol, quad.max_subdivisions, quad.initial_panels
    )
    num, den = res.value[:-1], res.value[-1]
    dens = num / den
    err = res.error[:-1] / den + np.abs(dens) * res.error[-1] / den
    # phases reach |rate * t|; their rounding bounds the attainable accuracy
    max_phase = max(np.abs(ma.phase_rate).max(), np.abs(mb.phase_rate).max()) * max(abs(lo), abs(hi))
    err = err + 16 * _EPS * max(1.0, max_phase) * np.abs(dens).max()
    return dens, err


def nonperturbative_density(scenario, tau_a, tau_b, grid=None, quad=None, refine=True, full_output=False):
    """Conditional density from the exact relativistic dispersion.

    With ``refine=True`` the calculation is repeated on a grid with doubled
    ``n_tau`` and ``n_p``; the refined value is returned and the change
    between the two levels (plus the quadrature error) is the error
    estimate. ``full_output=True`` returns ``(density, error)``.
    """
    _check_1d(scenario)
    grid = grid or SpectralGrid()
    quad = quad or QuadratureSpec(rel_tol=1e-13)
    scalar = np.ndim(tau_a) == 0
    tau_a = np.atleast_1d(np.asarray(tau_a, dtype=float))
    dens, err = _nonperturbative_once(scenario, tau_a, tau_b, grid, quad)
    if refine:
        fine, fine_err = _nonperturbative_once(
            scenario, tau_a, tau_b, grid.refined(), quad, n_p_auto_factor=2
        )
        err = np.abs(fine - dens) + fine_err
        dens = fine
    if not full_output:
        return float(dens[0]) if scalar else dens
    if scalar:
        return float(dens[0]), float(err[0])
    return dens, err


def nonperturbative_distribution(scenario, tau_b, tau_grid, grid=None, quad=None, refine=False):
    """:class:`ConditionalDistribution` sampled from the exact engine."""
    dens = nonperturbative_density(scenario, tau_grid, tau_b, grid, quad, refine=refine)
    return ConditionalDistribution.from_samples(tau_b, tau_grid, dens)


def leading_order_distribution(scenario, tau_b, tau_grid, quad=None):
    dens = leading_order_density(scenario, tau_grid, tau_b, quad)
    return ConditionalDistribution.from_samples(tau_b, tau_grid, dens)


def reduced_clock_state_check(scenario, t, grid=None):
    """Trace distance between exact and first-order reduced clock states.

    The exact state traces the spectrally evolved joint state of clock A over
    its momentum grid; the first-order state is
    ``rho(t) + i t (<H_cm>/m) [H_clock, rho(t)]`` with ``rho(t)`` the freely
    evolved fiducial.
    """
    _check_1d(scenario)
    grid = grid or SpectralGrid()
    modes = _clock_modes(scenario.cm_a, scenario.sigma, scenario.mass, grid)
    kappa = scenario.h_a / scenario.mass
    vec = modes.coeffs[None, :] * np.exp(-1j * modes.phase_rate * t)
    exact = kernels.mixture_density_matrix(np.ascontiguousarray(vec), modes.weights)
    free = modes.coeffs * np.exp(-1j * modes.k * t)
    rho = np.outer(free, free.conj())
    first = rho + 1j * t * kappa * (modes.k[:, None] - modes.k[None, :]) * rho
    diff = exact - first
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


def fit_power_law(x, y):
    """Least-squares fit of ``y = C x^alpha`` in log space -> ``(alpha, C)``."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    alpha, logc = np.polyfit(np.log(x), np.log(y), 1)
    return float(alpha), float(math.exp(logc))
