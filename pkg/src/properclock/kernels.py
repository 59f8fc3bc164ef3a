"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``leading_order_terms``, ``spectral_clock_density``,
``mixture_density_matrix``) dispatch on :data:`properclock._accel.USE_NUMBA`.
Both flavours are always importable so they can be cross-checked and
benchmarked against each other. Reductions run in a fixed order, so results
do not depend on thread count.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange

_SQRT_PI = math.sqrt(math.pi)


# -- per-clock leading-order t-integrand ----------------------------------

def leading_order_terms_numpy(t, tau_a, tau_b, sigma):
    """Order-split products of the per-clock t-integrands.

    Each clock contributes ``g(tau - t) * (1 + kappa * h(tau, t))`` with
    ``g`` the squared fiducial amplitude and ``h = -2 t (tau - t) / sigma^2``.
    Columns of the result, for ``na = len(tau_a)``:

    ``[0:na]``      g_A g_B
    ``[na:2na]``    g_A h_A g_B          (coefficient of kappa_A)
    ``[2na:3na]``   g_A g_B h_B          (coefficient of kappa_B)
    ``[3na:4na]``   g_A h_A g_B h_B      (coefficient of kappa_A kappa_B)
    ``4na``         g_B
    ``4na + 1``     g_B h_B
    """
    t = np.asarray(t, dtype=float)[:, None]
    tau_a = np.asarray(tau_a, dtype=float)[None, :]
    s2 = sigma * sigma
    norm = 1.0 / (_SQRT_PI * sigma)
    xa = tau_a - t
    xb = tau_b - t
    ga = norm * np.exp(-xa * xa / s2)
    gb = norm * np.exp(-xb * xb / s2)
    ha = -2.0 * t * xa / s2
    hb = -2.0 * t * xb / s2
    return np.concatenate(
        [ga * gb, ga * ha * gb, ga * gb * hb, ga * ha * gb * hb, gb, gb * hb],
        axis=1,
    )


@njit(cache=True)
def leading_order_terms_numba(t, tau_a, tau_b, sigma):
    nt = t.shape[0]
    na = tau_a.shape[0]
    out = np.empty((nt, 4 * na + 2))
    s2 = sigma * sigma
    norm = 1.0 / (math.sqrt(math.pi) * sigma)
    for i in range(nt):
        ti = t[i]
        xb = tau_b - ti
        gb = norm * math.exp(-xb * xb / s2)
        hb = -2.0 * ti * xb / s2
        for j in range(na):
            xa = tau_a[j] - ti
            ga = norm * math.exp(-xa * xa / s2)
            ha = -2.0 * ti * xa / s2
            out[i, j] = ga * gb
            out[i, na + j] = ga * ha * gb
            out[i, 2 * na + j] = ga * gb * hb
            out[i, 3 * na + j] = ga * ha * gb * hb
        out[i, 4 * na] = gb
        out[i, 4 * na + 1] = gb * hb
    return out


# -- momentum-traced clock density from exact phases ----------------------

def spectral_clock_density_numpy(phase_rate, coeffs, basis, weights, t):
    """Clock reading density traced over a momentum grid.

    Parameters
    ----------
    phase_rate : (n_p, n_k) float
        Energy (relative to the k=0 level of each momentum row) of every
        joint (p, k) eigenmode.
    coeffs : (n_k,) complex
        Fiducial clock amplitudes in the energy basis.
    basis : (n_k, n_tau) complex
        Energy eigenfunctions sampled at the clock readings of interest.
    weights : (n_p,) float
        Momentum quadrature weights times the centre-of-mass density.
    t : (n_t,) float
        Coordinate times.

    Returns
    -------
    (n_t, n_tau) float array of ``sum_p w_p |<tau|psi_p(t)>|^2``.
    """
    out = np.empty((t.shape[0], basis.shape[1]))
    for i, ti in enumerate(t):
        amp = (coeffs[None, :] * np.exp(-1j * phase_rate * ti)) @ basis
        out[i] = weights @ (amp.real ** 2 + amp.imag ** 2)
    return out


@njit(cache=True, parallel=True)
def spectral_clock_density_numba(phase_rate, coeffs, basis, weights, t):
    n_p, n_k = phase_rate.shape
    n_tau = basis.shape[1]
    nt = t.shape[0]
    out = np.empty((nt, n_tau))
    for i in prange(nt):
        ti = t[i]
        evolved = np.empty((n_p, n_k), dtype=np.complex128)
        for p in range(n_p):
            for k in range(n_k):
                ph = -phase_rate[p, k] * ti
                evolved[p, k] = coeffs[k] * complex(math.cos(ph), math.sin(ph))
        amp = np.dot(evolved, basis)
        for a in range(n_tau):
            acc = 0.0
            for p in range(n_p):
                s = amp[p, a]
                acc += weights[p] * (s.real * s.real + s.imag * s.imag)
            out[i, a] = acc
    return out


# -- momentum mixture of clock pure states --------------------------------

def mixture_density_matrix_numpy(vectors, weights):
    """``sum_p w_p |v_p><v_p|`` for row vectors ``v_p``."""
    return np.einsum("p,pi,pj->ij", weights, vectors, vectors.conj())


@njit(cache=True, parallel=True)
def mixture_density_matrix_numba(vectors, weights):
    n_p, n = vectors.shape
    out = np.zeros((n, n), dtype=np.complex128)
    for i in prange(n):
        for j in range(n):
            acc = 0j
            for p in range(n_p):
                acc += weights[p] * vectors[p, i] * vectors[p, j].conjugate()
            out[i, j] = acc
    return out


NUMPY_KERNELS = {
    "leading_order_terms": leading_order_terms_numpy,
    "spectral_clock_density": spectral_clock_density_numpy,
    "mixture_density_matrix": mixture_density_matrix_numpy,
}
NUMBA_KERNELS = {
    "leading_order_terms": leading_order_terms_numba,
    "spectral_clock_density": spectral_clock_density_numba,
    "mixture_density_matrix": mixture_density_matrix_numba,
}

_active = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS
leading_order_terms = _active["leading_order_terms"]
spectral_clock_density = _active["spectral_clock_density"]
mixture_density_matrix = _active["mixture_density_matrix"]
