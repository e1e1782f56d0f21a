"""Eigenvector-overlap analysis of transfer problems.

The information transfer fidelity (ITF) is the time-unconstrained upper bound
on the transfer probability,

    sqrt(ITF) = sum_n |<in|v_n><v_n|out>|  <=  1,

and a Lagrange analysis of maximizing it under orthonormality shows that
optimal frames must satisfy |<v_n|in>| = |<v_n|out>| for every n.  This
module computes the bound, the overlap sign pattern, and the residuals of
that optimality condition; it checks optimizer outputs rather than
constructing frames (realizing a prescribed frame by biases is out of scope).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import EigenSystem

SIGN_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ItfReport:
    sqrt_itf: float
    itf: float
    signs: tuple[int, ...]
    overlaps_in: np.ndarray
    overlaps_out: np.ndarray
    condition_residuals: np.ndarray


def _node_row(eig: EigenSystem, node: int) -> np.ndarray:
    if not 1 <= node <= eig.size:
        raise ValueError(f"node {node} out of range 1..{eig.size}")
    return eig.vecs[node - 1]


def compute_itf(eig: EigenSystem, in_node: int, out_node: int) -> ItfReport:
    """Transfer bound, overlap signs and per-eigenvector condition residuals.

    Signs are 0 where |<in|v_n><v_n|out>| < 1e-12 (undefined at zero overlap,
    excluded from sign-pattern statistics).
    """
    ov_in = _node_row(eig, in_node).copy()
    ov_out = _node_row(eig, out_node).copy()
    products = ov_in * ov_out
    sqrt_itf = float(np.sum(np.abs(products)))
    signs = tuple(
        0 if abs(pr) < SIGN_ZERO_TOL else (1 if pr > 0 else -1) for pr in products
    )
    return ItfReport(
        sqrt_itf=sqrt_itf,
        itf=sqrt_itf * sqrt_itf,
        signs=signs,
        overlaps_in=ov_in,
        overlaps_out=ov_out,
        condition_residuals=np.abs(np.abs(ov_in) - np.abs(ov_out)),
    )


def check_optimality_condition(
    eig: EigenSystem, in_node: int, out_node: int, tol: float
) -> tuple[bool, float]:
    """Whether | |<v_n|in>| - |<v_n|out>| | < tol for every n, and the worst
    residual.  Invariant under eigenvector sign flips."""
    resid = compute_itf(eig, in_node, out_node).condition_residuals
    worst = float(np.max(resid))
    return worst < tol, worst


def mirror_transfer_expression(eig: EigenSystem, in_node: int, t: float, phase: float) -> float:
    """4 sum_n |v_in,n|^2 sin^2((t lam_n - phi)/2).

    For mirror-symmetric Hamiltonians this is the phase-explicit alignment
    mismatch built from the input row alone; it equals
    sum_n |v_in,n|^2 |1 - e^{i(t lam_n - phi)}|^2 identically and vanishes
    when every t lam_n - phi is a multiple of 2 pi.
    """
    row = _node_row(eig, in_node)
    s = np.sin(0.5 * (t * eig.evals - phase))
    return float(4.0 * np.sum(row * row * s * s))
