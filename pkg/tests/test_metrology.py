import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from properclock import metrology as mt

omegas = st.floats(0.1, 10.0)


def test_mu_is_derived_by_integration():
    for omega in (0.5, 1.0, 3.0):
        clock = mt.TwoLevelClock(omega)
        assert clock.mu_derived
        assert clock.mu == pytest.approx(omega / math.pi, rel=1e-12)


def test_mu_from_scipy_operator_integral():
    omega = 1.7
    period = 2 * math.pi / omega
    # the (1,1) entry of the frame operator is 1/2 per unit reading
    diag, _ = integrate.quad(lambda t: 0.5, 0, period)
    off_re, _ = integrate.quad(lambda t: 0.5 * math.cos(2 * omega * t), 0, period)
    assert 1 / diag == pytest.approx(omega / math.pi, rel=1e-14)
    assert abs(off_re) < 1e-14


def test_two_level_completeness():
    assert mt.povm_completeness(mt.TwoLevelClock(1.0), 4096) <= 1e-9
    bad = mt.TwoLevelClock(1.0, mu=2 / math.pi)
    assert mt.povm_completeness(bad, 4096) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        mt.povm_completeness(mt.TwoLevelClock(1.0), 32)


def test_ideal_completeness_off_lattice():
    assert mt.povm_completeness(mt.IdealContinuousClock(1.0), 256) <= 1e-9


def test_ideal_clock_states_are_lattice_deltas():
    clock = mt.IdealContinuousClock(1.0)
    tau, h, _ = clock.lattice(128)
    v = clock.clock_state(tau[40], tau, h) * math.sqrt(h)
    expected = np.zeros(tau.size)
    expected[40] = 1.0
    assert np.allclose(v, expected, atol=1e-13)
    # energy-band-limited: off-lattice states keep unit norm
    w = clock.clock_state(tau[40] + 0.3 * h, tau, h) * math.sqrt(h)
    assert np.linalg.norm(w) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=30)
@given(omega=omegas, shift=st.floats(-20, 20))
def test_two_level_covariance(omega, shift):
    assert mt.covariance_check(mt.TwoLevelClock(omega), shift) <= 1e-9


@pytest.mark.parametrize("shift", [0.0, math.pi / 2, 2 * math.pi])
def test_two_level_covariance_examples(shift):
    assert mt.covariance_check(mt.TwoLevelClock(1.0), shift) <= 1e-12


@pytest.mark.parametrize("shift", [0.0, 0.7, -2.3])
def test_ideal_covariance(shift):
    assert mt.covariance_check(mt.IdealContinuousClock(1.0), shift) <= 1e-9


@pytest.mark.parametrize("tau", [0.0, 0.7, 3.0, -2.2])
def test_unbiasedness_ideal_gaussian(tau):
    bias, drift = mt.unbiasedness_check(mt.IdealContinuousClock(1.0), None, tau)
    assert abs(bias) <= 1e-8 and abs(drift) <= 1e-8


def test_unbiasedness_precondition():
    shifted = mt.ContinuousFiducial(lambda t: np.exp(-((t - 1.0) ** 2) / 2), "off-centre")
    with pytest.raises(ValueError):
        mt.unbiasedness_check(mt.IdealContinuousClock(1.0), shifted, 0.5)


def test_unbiasedness_two_level_is_informational():
    bias, drift = mt.unbiasedness_check(mt.TwoLevelClock(1.0), None, 0.0)
    assert bias == pytest.approx(0.0, abs=1e-12) and drift == 0.0
    bias, drift = mt.unbiasedness_check(mt.TwoLevelClock(1.0), None, 0.3)
    assert math.isfinite(bias) and math.isfinite(drift)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_gaussian_fisher_information(sigma):
    clock = mt.IdealContinuousClock(sigma)
    fc, fq = mt.fisher_information(clock)
    assert fq == pytest.approx(2 / sigma**2, rel=1e-9)
    assert fc == pytest.approx(fq, rel=1e-6)
    fc13, _ = mt.fisher_information(clock, tau=1.3)
    assert fc13 == pytest.approx(fc, abs=1e-9)


def test_qubit_fisher_information():
    clock = mt.TwoLevelClock(2.0)
    fc, fq = mt.fisher_information(clock)
    assert fq == pytest.approx(16.0, rel=1e-12)
    assert fc == pytest.approx(fq, rel=1e-6)
    assert mt.fisher_information(clock, tau=1.3)[0] == pytest.approx(fc, abs=1e-9)


def test_helstrom_saturation_and_mass_form():
    h = mt.helstrom_bound_check(mt.IdealContinuousClock(1.5))
    assert h.reading_variance == pytest.approx(1.5**2 / 2, rel=1e-9)
    assert h.ratio == pytest.approx(1.0, abs=1e-9)
    assert h.mass_product == pytest.approx(0.5, abs=1e-9)
    # c only rescales the mass spread, not the product dM dT c^2
    assert mt.helstrom_bound_check(mt.IdealContinuousClock(1.5), c=3.0).mass_product == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(sigma=st.floats(0.5, 1.5), separation=st.floats(0.5, 4.0))
def test_two_hump_is_strictly_above_bound(sigma, separation):
    clock = mt.IdealContinuousClock(1.0, extent=24.0)
    h = mt.helstrom_bound_check(clock, mt.ContinuousFiducial.two_hump(sigma, separation))
    assert h.ratio > 1.0


def test_orthogonality_time_two_level():
    for omega in (0.5, 1.0, 4.0):
        clock = mt.TwoLevelClock(omega)
        t = mt.orthogonality_time(clock)
        assert t == pytest.approx(math.pi / (2 * omega), rel=1e-9)
        dh = math.sqrt(mt.reading_stats(clock).energy_variance)
        assert t * 2 * dh == pytest.approx(math.pi, abs=1e-9)


def test_orthogonality_unreachable():
    with pytest.raises(mt.OrthogonalityUnreachable):
        mt.orthogonality_time(mt.TwoLevelClock(1.0), mt.QubitFiducial.ground())
    # unequal weights never reach zero overlap
    with pytest.raises(mt.OrthogonalityUnreachable):
        mt.orthogonality_time(mt.TwoLevelClock(1.0), mt.QubitFiducial((1.0, 0.5)))
    with pytest.raises(ValueError):
        mt.orthogonality_time(mt.IdealContinuousClock(1.0))


def test_qubit_fiducial_is_a_state():
    f = mt.QubitFiducial((3.0, 4.0j))
    rho = f.rho
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.all(np.linalg.eigvalsh(rho) > -1e-15)
    with pytest.raises(ValueError):
        mt.QubitFiducial((1.0, 0.0, 0.0))
