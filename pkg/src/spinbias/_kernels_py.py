"""Reference numpy implementation of the numerical kernels.

The compiled extension (``spinbias._core``) mirrors these signatures exactly;
this module is the import-time fallback and the ground truth the extension is
tested against.  Matrices are small (N <= 15) and dense throughout.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# Eigenvalue pairs closer than this (relative to max(1, |lam|)) switch the
# divided-difference quotient to its confluent limit; keeps the gradient
# accurate through spectral gaps below 1e-8 without catastrophic cancellation.
DEGENERACY_TOL = 1e-8


def amplitudes(evals, vecs, i_in, i_out, times):
    """<out| exp(-i t H) |in> for each t, from the spectral decomposition.

    ``vecs`` holds orthonormal eigenvectors in columns; indices are 0-based.
    """
    w = np.asarray(vecs)[i_out] * np.asarray(vecs)[i_in]
    phases = np.exp(-1j * np.multiply.outer(np.asarray(times, dtype=float), np.asarray(evals)))
    return phases @ w


def objective_core(h, i_in, i_out, t, want_time_grad=True):
    """Transfer probability at time t and its exact derivatives.

    Returns ``(p, dp_ddiag, dp_dt)`` where ``dp_ddiag[j]`` is the derivative
    of p under a unit perturbation of the j-th diagonal entry of ``h``
    (direction e_j e_j^T), computed through the spectral representation with
    the divided-difference kernel

        gamma_mn = (e^{-i t lam_m} - e^{-i t lam_n}) / (lam_m - lam_n),
        gamma_mm = -i t e^{-i t lam_m}.
    """
    lam, v = np.linalg.eigh(h)
    v_in = v[i_in]
    v_out = v[i_out]
    ph = np.exp(-1j * t * lam)
    amp = (v_out * ph) @ v_in
    p = amp.real * amp.real + amp.imag * amp.imag

    dl = lam[:, None] - lam[None, :]
    scale = np.maximum(1.0, np.maximum(np.abs(lam)[:, None], np.abs(lam)[None, :]))
    close = np.abs(dl) < DEGENERACY_TOL * scale
    limit = -1j * t * np.exp(-1j * t * 0.5 * (lam[:, None] + lam[None, :]))
    gamma = np.where(close, limit, (ph[:, None] - ph[None, :]) / np.where(close, 1.0, dl))

    # d amp / d bias_j = a_j^T gamma b_j with a_j[m] = v[j,m] v_out[m] etc.
    d_amp = np.einsum("jm,mn,jn->j", v * v_out, gamma, v * v_in)
    dp_ddiag = 2.0 * (np.conj(amp) * d_amp).real

    if want_time_grad:
        d_amp_dt = (v_out * (-1j * lam) * ph) @ v_in
        dp_dt = float(2.0 * (np.conj(amp) * d_amp_dt).real)
    else:
        dp_dt = 0.0
    return float(p), dp_ddiag, dp_dt
