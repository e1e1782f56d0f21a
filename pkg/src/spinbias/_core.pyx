# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels for the optimizer inner loop.

Mirrors spinbias._kernels_py: spectral transfer amplitudes and the
objective/gradient evaluation (LAPACK dsyev plus the divided-difference
contraction in C loops).  Selected automatically at import when built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin
from scipy.linalg.cython_lapack cimport dsyev

cnp.import_array()

BACKEND = "compiled"

DEGENERACY_TOL = 1e-8
cdef double DEG_TOL = 1e-8


def amplitudes(double[::1] evals, double[:, ::1] vecs, int i_in, int i_out, double[::1] times):
    """<out| exp(-i t H) |in> per sample time, from a spectral decomposition."""
    cdef int n = evals.shape[0]
    cdef int m = times.shape[0]
    cdef cnp.ndarray out = np.empty(m, dtype=complex)
    cdef double complex[::1] ov = out
    cdef int k, j
    cdef double t, re, im, w
    for k in range(m):
        t = times[k]
        re = 0.0
        im = 0.0
        for j in range(n):
            w = vecs[i_out, j] * vecs[i_in, j]
            re += w * cos(t * evals[j])
            im -= w * sin(t * evals[j])
        ov[k] = re + 1j * im
    return out


cdef int _dsyev_rows(double[:, ::1] a, double[::1] w, double[::1] work, int lwork) except -1:
    # Diagonalize in place. C-contiguous input read as Fortran order is the
    # transpose, which equals the (symmetric) input; eigenvectors come back in
    # Fortran columns, i.e. the rows of ``a``: a[m, j] = <j|v_m>.
    cdef int n = a.shape[0]
    cdef int info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'U'
    dsyev(&jobz, &uplo, &n, &a[0, 0], &n, &w[0], &work[0], &lwork, &info)
    if info != 0:
        raise ArithmeticError(f"dsyev failed with info={info}")
    return 0


def objective_core(double[:, ::1] h, int i_in, int i_out, double t, bint want_time_grad=True):
    """Transfer probability at time t and its exact derivatives.

    Same contract as the numpy reference: returns (p, dp_ddiag, dp_dt).
    """
    cdef int n = h.shape[0]
    cdef cnp.ndarray a_arr = np.array(h, dtype=np.float64, order="C")
    cdef double[:, ::1] a = a_arr
    cdef cnp.ndarray w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] lam = w_arr
    cdef int lwork = 34 * n if 34 * n > 3 * n - 1 else 3 * n - 1
    cdef cnp.ndarray work_arr = np.empty(lwork, dtype=np.float64)
    cdef double[::1] work = work_arr
    _dsyev_rows(a, lam, work, lwork)

    cdef cnp.ndarray ph_arr = np.empty(n, dtype=complex)
    cdef double complex[::1] ph = ph_arr
    cdef int m, j, q
    for m in range(n):
        ph[m] = cos(t * lam[m]) - 1j * sin(t * lam[m])

    # amplitude and probability; a[m, j] = <j|v_m>
    cdef double complex amp = 0.0
    for m in range(n):
        amp = amp + a[m, i_out] * a[m, i_in] * ph[m]
    cdef double p = amp.real * amp.real + amp.imag * amp.imag

    # divided-difference kernel
    cdef cnp.ndarray g_arr = np.empty((n, n), dtype=complex)
    cdef double complex[:, ::1] gam = g_arr
    cdef double dl, sc, mid
    for m in range(n):
        for q in range(n):
            dl = lam[m] - lam[q]
            sc = fabs(lam[m])
            if fabs(lam[q]) > sc:
                sc = fabs(lam[q])
            if sc < 1.0:
                sc = 1.0
            if fabs(dl) < DEG_TOL * sc:
                mid = 0.5 * t * (lam[m] + lam[q])
                gam[m, q] = -1j * t * (cos(mid) - 1j * sin(mid))
            else:
                gam[m, q] = (ph[m] - ph[q]) / dl

    cdef cnp.ndarray grad_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double complex s, row
    cdef double complex camp = amp.real - 1j * amp.imag
    for j in range(n):
        s = 0.0
        for m in range(n):
            row = 0.0
            for q in range(n):
                row = row + gam[m, q] * (a[q, j] * a[q, i_in])
            s = s + (a[m, j] * a[m, i_out]) * row
        grad[j] = 2.0 * (camp * s).real

    cdef double dp_dt = 0.0
    cdef double complex ds = 0.0
    if want_time_grad:
        for m in range(n):
            ds = ds + a[m, i_out] * a[m, i_in] * (-1j * lam[m]) * ph[m]
        dp_dt = 2.0 * (camp * ds).real
    return p, grad_arr, dp_dt
