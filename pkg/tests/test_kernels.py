import subprocess
import sys

import numpy as np
import pytest

from properclock import kernels
from properclock._accel import HAVE_NUMBA

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def test_leading_order_terms_parity(rng):
    t = rng.uniform(-5, 5, 37)
    tau_a = rng.uniform(-3, 3, 5)
    a = kernels.NUMPY_KERNELS["leading_order_terms"](t, tau_a, 0.7, 1.3)
    b = kernels.NUMBA_KERNELS["leading_order_terms"](t, tau_a, 0.7, 1.3)
    assert a.shape == (37, 4 * 5 + 2)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-300)


def test_spectral_density_parity(rng):
    n_p, n_k, n_tau, n_t = 40, 24, 6, 15
    rate = np.ascontiguousarray(rng.uniform(0, 0.1, (n_p, n_k)))
    coeffs = rng.normal(size=n_k) + 1j * rng.normal(size=n_k)
    basis = np.ascontiguousarray(np.exp(1j * rng.uniform(0, 6, (n_k, n_tau))))
    w = rng.uniform(0, 1, n_p)
    t = rng.uniform(-50, 50, n_t)
    a = kernels.NUMPY_KERNELS["spectral_clock_density"](rate, coeffs, basis, w, t)
    b = kernels.NUMBA_KERNELS["spectral_clock_density"](rate, coeffs, basis, w, t)
    assert a.shape == (n_t, n_tau)
    assert np.allclose(a, b, rtol=1e-12)


def test_mixture_density_matrix_parity(rng):
    v = np.ascontiguousarray(rng.normal(size=(30, 8)) + 1j * rng.normal(size=(30, 8)))
    w = rng.uniform(0, 1, 30)
    a = kernels.NUMPY_KERNELS["mixture_density_matrix"](v, w)
    b = kernels.NUMBA_KERNELS["mixture_density_matrix"](v, w)
    ref = sum(wi * np.outer(vi, vi.conj()) for wi, vi in zip(w, v))
    assert np.allclose(a, ref, rtol=1e-13)
    assert np.allclose(b, ref, rtol=1e-13)


def test_numpy_fallback_selected_by_env():
    code = "from properclock import _accel, kernels; print(_accel.USE_NUMBA, kernels.leading_order_terms is kernels.NUMPY_KERNELS['leading_order_terms'])"
    env = {"PROPERCLOCK_DISABLE_NUMBA": "1", "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
