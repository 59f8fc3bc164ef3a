"""Covariant time observables and the estimation bounds they saturate.

Two clock models are provided:

``IdealContinuousClock``
    clock Hamiltonian = momentum on L^2(R), readings = position. It is
    represented on a periodic reading grid with an odd number of points;
    clock states at arbitrary readings are band-limited (Dirichlet-kernel)
    delta functions, so they stay orthogonal on the lattice.
``TwoLevelClock``
    ``H = Omega sigma_z`` with clock states
    ``|tau> = (|0> + exp(2 i Omega tau)|1>) / sqrt(2)`` on ``(0, 2 pi/Omega]``.
    The POVM weight ``mu`` is obtained by brute-force integration of the
    clock states unless it is given explicitly.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np

log = logging.getLogger(__name__)


class OrthogonalityUnreachable(RuntimeError):
    """The fiducial never evolves into an orthogonal state."""


class BoundViolation(AssertionError):
    """A computed variance falls below the Helstrom-Holevo bound."""


# -- clock models ---------------------------------------------------------

@dataclass(frozen=True)
class IdealContinuousClock:
    """Ideal clock on a periodic reading grid of half-width ``extent * sigma``."""

    sigma: float = 1.0
    extent: float = 16.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.extent > 0):
            raise ValueError("sigma and extent must be > 0")

    def lattice(self, resolution):
        """Readings ``tau``, spacing ``h`` and energies ``k`` for ``resolution`` points.

        An even ``resolution`` is bumped to the next odd number so the
        energy grid is symmetric.
        """
        if resolution < 64:
            raise ValueError("resolution must be >= 64")
        n = resolution | 1
        half = self.extent * self.sigma
        h = 2 * half / n
        m = n // 2
        tau = (np.arange(n) - m) * h
        k = 2 * np.pi * np.fft.fftfreq(n, h)
        return tau, h, k

    def clock_state(self, reading, tau, h):
        """Lattice coefficients of ``|reading>`` (delta-normalised, scaled by sqrt(h))."""
        n = tau.size
        x = tau - reading
        num = np.sin(np.pi * x / h)
        den = n * np.sin(np.pi * x / (n * h))
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(np.abs(den) < 1e-300, 1.0, num / den)
        # exact lattice hits (x = 0 mod period) give the limit value
        hit = np.isclose(np.mod(x / h + 0.5, n) - 0.5, 0.0, atol=1e-13)
        d = np.where(hit, 1.0, d)
        return d / math.sqrt(h)

    @staticmethod
    def evolve(psi, k, tau_shift):
        """Apply ``exp(-i H tau_shift)`` to lattice amplitudes."""
        return np.fft.ifft(np.exp(-1j * k * tau_shift) * np.fft.fft(psi))


@dataclass(frozen=True)
class TwoLevelClock:
    """Qubit clock ``H = omega * sigma_z``."""

    omega: float
    mu: float = None
    mu_derived: bool = field(init=False)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        object.__setattr__(self, "mu_derived", self.mu is None)
        if self.mu is None:
            object.__setattr__(self, "mu", derive_two_level_mu(self.omega))

    @property
    def period(self):
        return 2 * math.pi / self.omega

    @property
    def hamiltonian(self):
        return self.omega * np.diag([1.0, -1.0]).astype(complex)

    def clock_state(self, tau):
        """Columns ``|tau_j>`` for an array of readings."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return np.vstack([np.ones_like(tau), np.exp(2j * self.omega * tau)]) / math.sqrt(2)

    def unitary(self, tau):
        return np.diag([np.exp(-1j * self.omega * tau), np.exp(1j * self.omega * tau)])

    def readings(self, resolution, centred=False):
        """Midpoint lattice over one period; ``centred`` uses (-P/2, P/2]."""
        h = self.period / resolution
        tau = (np.arange(resolution) + 0.5) * h
        if centred:
            tau = tau - 0.5 * self.period
        return tau, h


def derive_two_level_mu(omega, resolution=4096):
    """POVM weight making ``mu * integral |tau><tau| dtau`` the identity.

    Integrates the clock-state projectors over ``(0, 2 pi / omega]`` by the
    midpoint rule and inverts the (scalar) result.
    """
    period = 2 * math.pi / omega
    h = period / resolution
    tau = (np.arange(resolution) + 0.5) * h
    states = np.vstack([np.ones_like(tau), np.exp(2j * omega * tau)]) / math.sqrt(2)
    frame = h * states @ states.conj().T
    scale = np.trace(frame).real / 2
    return 1.0 / scale


# -- fiducial states ------------------------------------------------------

@dataclass(frozen=True)
class ContinuousFiducial:
    """Clock wave function for the ideal clock, given as a callable of tau."""

    amplitude: object
    label: str = "custom"

    @classmethod
    def gaussian(cls, sigma, energy=0.0):
        """Gaussian of width ``sigma`` with mean energy ``energy``."""
        def amp(tau):
            return np.exp(-(tau**2) / (2 * sigma**2) + 1j * energy * tau)
        return cls(amp, f"gaussian(sigma={sigma})")

    @classmethod
    def two_hump(cls, sigma, separation):
        """Equal mixture of two Gaussians at ``+-separation / 2``."""
        def amp(tau):
            a = separation / 2
            return np.exp(-((tau - a) ** 2) / (2 * sigma**2)) + np.exp(-((tau + a) ** 2) / (2 * sigma**2))
        return cls(amp, f"two_hump(sigma={sigma}, separation={separation})")

    def lattice_state(self, tau, h):
        psi = np.asarray(self.amplitude(tau), dtype=complex) * math.sqrt(h)
        return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class QubitFiducial:
    """Pure two-level fiducial state."""

    vector: tuple

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex)
        if v.shape != (2,):
            raise ValueError("qubit fiducial needs two amplitudes")
        v = v / np.linalg.norm(v)
        object.__setattr__(self, "vector", tuple(v))

    @property
    def ket(self):
        return np.array(self.vector)

    @property
    def rho(self):
        v = self.ket
        return np.outer(v, v.conj())

    @classmethod
    def plus(cls):
        return cls((1.0, 1.0))

    @classmethod
    def ground(cls):
        return cls((1.0, 0.0))


def _fiducial_for(model, fiducial):
    if fiducial is not None:
        return fiducial
    if isinstance(model, IdealContinuousClock):
        return ContinuousFiducial.gaussian(model.sigma)
    return QubitFiducial.plus()


# -- POVM checks ----------------------------------------------------------

def _rank_two_norm(v, w):
    """Operator norm of ``|v><v| - |w><w|``.

    The nonzero eigenvalues solve ``l^2 - (a - b) l - det = 0`` with
    ``a = |v|^2``, ``b = |w|^2`` and Gram determinant ``det``; the
    determinant is formed from the component of ``w`` orthogonal to ``v``
    so nearly equal vectors do not cancel catastrophically.
    """
    a = float(np.vdot(v, v).real)
    b = float(np.vdot(w, w).real)
    perp = w - v * (np.vdot(v, w) / a)
    det = a * float(np.vdot(perp, perp).real)
    half = 0.5 * (a - b)
    return abs(half) + math.sqrt(half * half + det)


def povm_completeness(model, resolution=4096):
    """Operator-norm deviation of the discretised ``integral E(tau) dtau`` from I."""
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    if isinstance(model, TwoLevelClock):
        tau, h = model.readings(resolution)
        states = model.clock_state(tau)
        frame = model.mu * h * states @ states.conj().T
        return float(np.linalg.norm(frame - np.eye(2), 2))
    tau, h, _ = model.lattice(resolution)
    # integrate over readings offset from the lattice by half a step, so the
    # check exercises genuinely off-lattice clock states
    states = np.column_stack([model.clock_state(s, tau, h) for s in tau + 0.5 * h])
    frame = h * states @ states.conj().T
    return float(np.linalg.norm(frame - np.eye(tau.size), 2))


def covariance_check(model, tau_shift, resolution=256, n_samples=16):
    """Max over sample readings of ``||U E(tau) U^dag - E(tau + shift)||``."""
    rng = np.random.default_rng(0)
    if isinstance(model, TwoLevelClock):
        tau = rng.uniform(0, model.period, n_samples)
        u = model.unitary(tau_shift)
        worst = 0.0
        for t in tau:
            v = u @ model.clock_state(t)[:, 0]
            w = model.clock_state(np.mod(t + tau_shift, model.period))[:, 0]
            worst = max(worst, model.mu * _rank_two_norm(v, w))
        return worst
    grid, h, k = model.lattice(resolution)
    half = model.extent * model.sigma
    tau = rng.uniform(-0.5 * half, 0.5 * half, n_samples)
    worst = 0.0
    for t in tau:
        v = model.evolve(model.clock_state(t, grid, h), k, tau_shift) * math.sqrt(h)
        w = model.clock_state(t + tau_shift, grid, h) * math.sqrt(h)
        worst = max(worst, _rank_two_norm(v, w))
    return worst


# -- reading statistics ---------------------------------------------------

@dataclass(frozen=True)
class ReadingStats:
    mean: float
    variance: float
    energy_mean: float
    energy_variance: float


def _ideal_distribution(model, fiducial, tau, resolution):
    grid, h, k = model.lattice(resolution)
    psi = model.evolve(fiducial.lattice_state(grid, h), k, tau)
    return grid, h, k, psi


def _qubit_amplitudes(model, fiducial, tau, readings):
    psi = model.unitary(tau) @ fiducial.ket
    return model.clock_state(readings).conj().T @ psi, psi


def reading_stats(model, fiducial=None, tau=0.0, resolution=2048):
    """Mean and variance of the reading and of the clock energy on ``rho(tau)``."""
    fiducial = _fiducial_for(model, fiducial)
    if isinstance(model, TwoLevelClock):
        readings, h = model.readings(resolution, centred=True)
        amp, psi = _qubit_amplitudes(model, fiducial, tau, readings)
        prob = model.mu * np.abs(amp) ** 2 * h
        energies = np.array([model.omega, -model.omega])
        weights = np.abs(psi) ** 2
    else:
        readings, h, k, psi = _ideal_distribution(model, fiducial, tau, resolution)
        prob = np.abs(psi) ** 2
        spec = np.abs(np.fft.fft(psi)) ** 2
        weights = spec / spec.sum()
        energies = k
    mean = float(prob @ readings)
    var = float(prob @ (readings - mean) ** 2)
    e_mean = float(weights @ energies)
    e_var = float(weights @ (energies - e_mean) ** 2)
    return ReadingStats(mean, var, e_mean, e_var)


def unbiasedness_check(model, fiducial=None, tau=0.0, resolution=2048, strict=True):
    """Bias and variance drift of the reading for the shifted fiducial.

    Returns ``(bias, variance_drift)`` with ``bias = <T>_{rho(tau)} - tau``
    and ``variance_drift = Var_{rho(tau)} - Var_rho``. For the ideal clock the
    fiducial must have zero mean reading. On the two-level clock the readings
    live on a circle and the linear mean depends on where the window is cut,
    so the numbers are reported (readings taken on ``(-P/2, P/2]``) without
    any precondition.
    """
    fiducial = _fiducial_for(model, fiducial)
    base = reading_stats(model, fiducial, 0.0, resolution)
    if isinstance(model, IdealContinuousClock):
        if strict and abs(base.mean) > 1e-10 * model.sigma:
            raise ValueError(f"fiducial mean reading must be 0, got {base.mean:.3e}")
    else:
        log.info("two-level clock: circular readings, unbiasedness numbers are informational")
    shifted = reading_stats(model, fiducial, tau, resolution)
    return shifted.mean - tau, shifted.variance - base.variance


def fisher_information(model, fiducial=None, tau=0.0, resolution=2048):
    """Classical Fisher information of the reading and ``4 Var(H_clock)``.

    The classical value is ``integral (dp/dtau)^2 / p`` over readings, with
    the density derivative obtained spectrally from the evolved amplitude.
    Covariance makes the derivative with respect to the encoded parameter
    equal to minus the reading derivative. Returns ``(classical, quantum)``.
    """
    fiducial = _fiducial_for(model, fiducial)
    if isinstance(model, TwoLevelClock):
        readings, h = model.readings(resolution)
        amp, psi = _qubit_amplitudes(model, fiducial, tau, readings)
        kk = 2 * np.pi * np.fft.fftfreq(resolution, h)
        damp = np.fft.ifft(1j * kk * np.fft.fft(amp))
        dens = model.mu * np.abs(amp) ** 2
        ddens = model.mu * 2 * np.real(np.conj(amp) * damp)
        stats = reading_stats(model, fiducial, tau, resolution)
    else:
        readings, h, k, psi = _ideal_distribution(model, fiducial, tau, resolution)
        amp = psi / math.sqrt(h)
        damp = np.fft.ifft(1j * k * np.fft.fft(amp))
        dens = np.abs(amp) ** 2
        ddens = 2 * np.real(np.conj(amp) * damp)
        stats = reading_stats(model, fiducial, tau, resolution)
    mask = dens > 1e-300
    classical = float(h * np.sum(ddens[mask] ** 2 / dens[mask]))
    return classical, 4 * stats.energy_variance


@dataclass(frozen=True)
class HelstromCheck:
    reading_variance: float
    bound: float
    mass_product: float

    @property
    def ratio(self):
        """``Var(T) / bound``; 1 means saturation."""
        return self.reading_variance / self.bound


def helstrom_bound_check(model, fiducial=None, resolution=2048, c=1.0, tol=1e-12):
    """Compare ``Var(T)`` with ``1 / (4 Var(H))`` and form ``dM dT c^2``.

    ``M = m + H/c^2``, so the rest mass drops out of ``dM``.
    Raises :class:`BoundViolation` if ``Var(T) < bound - tol``.
    """
    fiducial = _fiducial_for(model, fiducial)
    st = reading_stats(model, fiducial, 0.0, resolution)
    bound = 1.0 / (4 * st.energy_variance)
    d_mass = math.sqrt(st.energy_variance) / c**2
    product = d_mass * math.sqrt(st.variance) * c**2
    if st.variance < bound - tol:
        raise BoundViolation(f"Var(T) = {st.variance:.6g} below bound {bound:.6g}")
    return HelstromCheck(st.variance, bound, product)


def orthogonality_time(model, fiducial=None, floor=1e-9, periods=10, samples_per_period=256):
    """First time at which the evolved fiducial is orthogonal to itself.

    The survival amplitude ``A(t) = <psi| exp(-iHt) |psi>`` is scanned over
    ``periods`` clock periods; each local minimum of ``|A|^2`` is refined by
    bisection on the sign of ``d|A|^2/dt`` and accepted when ``|A| < floor``.
    """
    if not isinstance(model, TwoLevelClock):
        raise ValueError("orthogonality time is only defined here for the two-level clock")
    fiducial = _fiducial_for(model, fiducial)
    energies = np.diag(model.hamiltonian).real
    weights = np.abs(fiducial.ket) ** 2

    def amp(t):
        return np.sum(weights * np.exp(-1j * energies * t))

    def slope(t):
        a = amp(t)
        da = np.sum(-1j * energies * weights * np.exp(-1j * energies * t))
        return 2 * np.real(np.conj(a) * da)

    spread = math.sqrt(max(weights @ energies**2 - (weights @ energies) ** 2, 0.0))
    if spread == 0.0:
        raise OrthogonalityUnreachable("stationary fiducial: |<psi|psi(t)>| = 1 for all t")
    ts = np.linspace(0.0, periods * model.period, periods * samples_per_period + 1)
    mag = np.array([abs(amp(t)) ** 2 for t in ts])
    for i in range(1, ts.size - 1):
        if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]:
            lo, hi = ts[i - 1], ts[i + 1]
            while hi - lo > 1e-15 * hi:
                mid = 0.5 * (lo + hi)
                if slope(mid) < 0:
                    lo = mid
                else:
                    hi = mid
            t_star = 0.5 * (lo + hi)
            if abs(amp(t_star)) < floor:
                return t_star
    raise OrthogonalityUnreachable(
        f"no orthogonal state within {periods} periods (min |A| = {math.sqrt(mag.min()):.3e})"
    )
