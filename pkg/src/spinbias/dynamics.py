"""Exact spectral dynamics on the single-excitation subspace.

Evolution is always computed through the eigendecomposition
H = V diag(lam) V^T (never by ODE integration), so probabilities are exact up
to LAPACK roundoff and consistent with the analytic gradients built on the
same representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a real
    symmetric Hamiltonian, with a deterministic sign convention."""

    evals: np.ndarray
    vecs: np.ndarray

    @property
    def size(self) -> int:
        return self.evals.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vecs * self.evals) @ self.vecs.T


@dataclass(frozen=True)
class ProbabilitySeries:
    """Sampled transfer probability p(t) on a uniform grid starting at 0."""

    times: np.ndarray
    values: np.ndarray
    in_node: int
    out_node: int


@dataclass(frozen=True)
class Peak:
    time: float
    probability: float
    refined: bool


def eigendecompose(h) -> EigenSystem:
    """Diagonalize a real symmetric Hamiltonian.

    Eigenvalues ascend; each eigenvector is flipped so its first component of
    magnitude above 1e-12 is positive, which makes the decomposition
    deterministic for non-degenerate spectra.
    """
    hm = np.asarray(h, dtype=float)
    if hm.ndim != 2 or hm.shape[0] != hm.shape[1]:
        raise ValueError("Hamiltonian must be square")
    if not np.all(np.isfinite(hm)):
        raise ArithmeticError("Hamiltonian has non-finite entries")
    if np.max(np.abs(hm - hm.T)) > 1e-12:
        raise ValueError("Hamiltonian must be symmetric")
    evals, vecs = np.linalg.eigh(hm)
    vecs = vecs.copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        lead = nz[0] if nz.size else int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            vecs[:, k] = -col
    return EigenSystem(evals=evals, vecs=vecs)


def _check_node(eig: EigenSystem, node: int) -> int:
    if not 1 <= node <= eig.size:
        raise ValueError(f"node {node} out of range 1..{eig.size}")
    return node - 1


def transfer_amplitude(eig: EigenSystem, in_node: int, out_node: int, t: float) -> complex:
    """<out| exp(-i t H) |in>."""
    i = _check_node(eig, in_node)
    o = _check_node(eig, out_node)
    return complex(_kernels.amplitudes(eig.evals, eig.vecs, i, o, [float(t)])[0])


def transfer_probability(eig: EigenSystem, in_node: int, out_node: int, t: float) -> float:
    """p(t) = |<out| exp(-i t H) |in>|^2."""
    if t < 0:
        raise ValueError("time must be non-negative")
    a = transfer_amplitude(eig, in_node, out_node, t)
    return a.real * a.real + a.imag * a.imag


def probability_series(
    eig: EigenSystem, in_node: int, out_node: int, t_max: float, dt: float
) -> ProbabilitySeries:
    """Sample p(t) on the grid 0, dt, 2*dt, ... <= t_max (t_max included when
    it is a multiple of dt)."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    i = _check_node(eig, in_node)
    o = _check_node(eig, out_node)
    n_steps = int(np.floor(t_max / dt + 1e-9))
    times = dt * np.arange(n_steps + 1)
    amps = _kernels.amplitudes(eig.evals, eig.vecs, i, o, times)
    values = amps.real**2 + amps.imag**2
    return ProbabilitySeries(times=times, values=values, in_node=in_node, out_node=out_node)


def find_peaks(series: ProbabilitySeries, threshold: float) -> list[Peak]:
    """Interior local maxima of a sampled series above ``threshold``.

    Each peak is refined by the vertex of the parabola through the three
    bracketing samples (no iterative polishing; peaks seed an optimizer that
    polishes anyway).  Peaks are returned sorted by time.
    """
    t = series.times
    p = series.values
    if len(t) == 0:
        raise ValueError("series is empty")
    peaks: list[Peak] = []
    for j in range(1, len(p) - 1):
        if not (p[j] >= p[j - 1] and p[j] > p[j + 1] and p[j] > threshold):
            continue
        y0, y1, y2 = p[j - 1], p[j], p[j + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0.0:
            off = 0.5 * (y0 - y2) / denom
            step = 0.5 * (t[j + 1] - t[j - 1])
            tt = float(t[j] + off * step)
            pp = float(min(1.0, max(0.0, y1 - 0.25 * (y0 - y2) * off)))
            peaks.append(Peak(time=tt, probability=pp, refined=True))
        else:
            peaks.append(Peak(time=float(t[j]), probability=float(y1), refined=False))
    return peaks


def rabi_probability(c1: float, c2: float, t: float) -> float:
    """Two-site closed form: p12(t) = (Omega/2)^-2 sin^2(Omega t / 2) with
    Rabi frequency Omega = sqrt((c2 - c1)^2 + 4).  Exactly matches
    :func:`transfer_probability` on the biased 2-chain."""
    omega = np.sqrt((c2 - c1) ** 2 + 4.0)
    s = np.sin(0.5 * omega * t)
    return float(4.0 / (omega * omega) * s * s)
