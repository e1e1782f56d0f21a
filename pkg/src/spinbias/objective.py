"""Infidelity objective over biases (and optionally the transfer time).

The optimizer always works in an unconstrained raw parameter space; the
constraint handling lives entirely in the decode map:

* ``symmetric``  - one raw value per orbit of the ring reflection that swaps
  the input and output node (ceil(N/2) orbits), replicated to the full bias
  vector.  For chains the mirror j -> N+1-j is used (end-to-end transfer).
* ``box``        - raw values squashed onto [lo, hi] by a logistic.
* free time     - t = softplus(x) > 0; bounded time - t = t_max * sigmoid(x).

Gradients are exact: the spectral divided-difference kernel (see the kernel
modules) chained through the decode Jacobian.  A constant shift of all biases
only changes a global phase, so unconstrained gradients sum to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from . import _kernels
from .dynamics import EigenSystem
from .network import NetworkSpec, build_reduced_hamiltonian

CONSTRAINTS = ("none", "symmetric", "box", "symmetric-box")
TIME_MODES = ("fixed", "free", "bounded")


@dataclass(frozen=True)
class TransferProblem:
    """One transfer optimization instance: network, node pair, time mode and
    bias constraint."""

    spec: NetworkSpec
    in_node: int
    out_node: int
    time_mode: str = "free"
    fixed_time: float | None = None
    max_time: float | None = None
    constraint: str = "none"
    box: tuple[float, float] | None = None

    def __post_init__(self):
        n = self.spec.size
        if not (1 <= self.in_node <= n and 1 <= self.out_node <= n):
            raise ValueError("nodes must lie in 1..N")
        if self.in_node == self.out_node:
            raise ValueError("input and output node must differ")
        if self.time_mode not in TIME_MODES:
            raise ValueError(f"unknown time mode {self.time_mode!r}")
        if self.time_mode == "fixed":
            if self.fixed_time is None or self.fixed_time <= 0:
                raise ValueError("fixed time mode requires fixed_time > 0")
        if self.time_mode == "bounded":
            if self.max_time is None or self.max_time <= 0:
                raise ValueError("bounded time mode requires max_time > 0")
        if self.constraint not in CONSTRAINTS:
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if "box" in self.constraint:
            if self.box is None or not self.box[0] < self.box[1]:
                raise ValueError("box constraint requires lo < hi")
        if "symmetric" in self.constraint:
            self.orbits()  # validates canonical node placement

    # -- parameter space layout -------------------------------------------

    def orbits(self) -> list[tuple[int, ...]]:
        """Bias orbits (1-based) of the mirror symmetry between input and output."""
        n = self.spec.size
        if self.spec.kind == "ring":
            if self.in_node != 1:
                raise ValueError(
                    "symmetric constraint requires the canonical pair in=1, "
                    "out<=ceil(N/2); rotate the ring first (translation invariance)"
                )
            return symmetry_pairs(n, self.out_node)
        if {self.in_node, self.out_node} != {1, n}:
            raise ValueError("symmetric constraint on a chain requires end-to-end transfer")
        return _mirror_orbits(n)

    @property
    def distance(self) -> int:
        """Hop count from input to output along the short path."""
        d = abs(self.out_node - self.in_node)
        if self.spec.kind == "ring":
            d = min(d, self.spec.size - d)
        return d

    @property
    def n_bias_params(self) -> int:
        if "symmetric" in self.constraint:
            return len(self.orbits())
        return self.spec.size

    @property
    def has_time_param(self) -> bool:
        return self.time_mode in ("free", "bounded")

    @property
    def n_params(self) -> int:
        return self.n_bias_params + (1 if self.has_time_param else 0)


def symmetry_pairs(n: int, k: int) -> list[tuple[int, ...]]:
    """Orbits of the ring reflection that maps node 1 onto node k.

    The reflection sends j to ((k - j) mod N) + 1; orbits are returned as
    sorted tuples (pairs or fixed points) ordered by their smallest node.
    For odd N there are exactly ceil(N/2) of them (one fixed node); for even
    N the mirror axis passes through two nodes when k is odd (N/2 + 1 orbits)
    and through two mid-edges when k is even (N/2 orbits).
    """
    if not 2 <= k <= (n + 1) // 2:
        raise ValueError(f"output node must satisfy 2 <= k <= ceil(N/2), got k={k}, N={n}")
    return _orbits_of(n, lambda j: ((k - j) % n) + 1)


def _mirror_orbits(n: int) -> list[tuple[int, ...]]:
    return _orbits_of(n, lambda j: n + 1 - j)


def _orbits_of(n, image) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    orbs: list[tuple[int, ...]] = []
    for j in range(1, n + 1):
        if j in seen:
            continue
        orb = tuple(sorted({j, image(j)}))
        seen.update(orb)
        orbs.append(orb)
    return orbs


# -- raw parameter <-> (bias, time) maps -----------------------------------


def _softplus(x: float) -> float:
    return float(np.logaddexp(0.0, x))


def _inv_softplus(t: float) -> float:
    if t <= 0:
        raise ValueError("softplus-mapped time must be positive")
    if t > 40.0:  # exp(-t) underflows; softplus is the identity here
        return float(t)
    return float(t + np.log1p(-np.exp(-t)))


def decode(params, problem: TransferProblem) -> tuple[np.ndarray, float]:
    """Map a raw parameter vector to a full (bias, time) pair."""
    x = np.asarray(params, dtype=float)
    if x.shape != (problem.n_params,):
        raise ValueError(f"expected {problem.n_params} raw parameters, got {x.shape}")
    raw_bias = x[: problem.n_bias_params]
    if "box" in problem.constraint:
        lo, hi = problem.box
        vals = lo + (hi - lo) * expit(raw_bias)
    else:
        vals = raw_bias
    if "symmetric" in problem.constraint:
        bias = np.empty(problem.spec.size)
        for v, orb in zip(vals, problem.orbits()):
            for j in orb:
                bias[j - 1] = v
    else:
        bias = np.array(vals)
    if problem.time_mode == "fixed":
        t = float(problem.fixed_time)
    elif problem.time_mode == "free":
        t = _softplus(x[-1])
    else:
        t = float(problem.max_time) * float(expit(x[-1]))
    return bias, t


def encode(problem: TransferProblem, bias, t: float | None = None) -> np.ndarray:
    """Inverse of :func:`decode` on feasible points (strict box/bound interior)."""
    b = np.asarray(bias, dtype=float)
    if "symmetric" in problem.constraint:
        orbs = problem.orbits()
        vals = np.array([b[orb[0] - 1] for orb in orbs])
        for v, orb in zip(vals, orbs):
            if any(b[j - 1] != v for j in orb):
                raise ValueError("bias vector is not symmetric under the node reflection")
    else:
        if b.shape != (problem.spec.size,):
            raise ValueError("bias length does not match network size")
        vals = b
    if "box" in problem.constraint:
        lo, hi = problem.box
        frac = (vals - lo) / (hi - lo)
        if np.any(frac <= 0) or np.any(frac >= 1):
            raise ValueError("biases must lie strictly inside the box")
        raw_bias = logit(frac)
    else:
        raw_bias = vals
    if not problem.has_time_param:
        return np.asarray(raw_bias, dtype=float)
    if t is None:
        raise ValueError("this problem has a time parameter; pass t")
    if problem.time_mode == "free":
        raw_t = _inv_softplus(float(t))
    else:
        frac = float(t) / float(problem.max_time)
        if not 0 < frac < 1:
            raise ValueError("time must lie strictly inside (0, max_time)")
        raw_t = float(logit(frac))
    return np.concatenate([np.asarray(raw_bias, dtype=float), [raw_t]])


def infidelity_and_gradient(params, problem: TransferProblem) -> tuple[float, np.ndarray]:
    """1 - p(t) and its exact gradient in the raw parameter space."""
    x = np.asarray(params, dtype=float)
    bias, t = decode(x, problem)
    h = build_reduced_hamiltonian(problem.spec, bias)
    p, dp_dbias, dp_dt = _kernels.objective_core(
        h, problem.in_node - 1, problem.out_node - 1, t, problem.has_time_param
    )

    if "symmetric" in problem.constraint:
        dvals = np.array([sum(dp_dbias[j - 1] for j in orb) for orb in problem.orbits()])
    else:
        dvals = dp_dbias
    if "box" in problem.constraint:
        lo, hi = problem.box
        s = expit(x[: problem.n_bias_params])
        dvals = dvals * (hi - lo) * s * (1.0 - s)

    grad = np.empty(problem.n_params)
    grad[: problem.n_bias_params] = -dvals
    if problem.has_time_param:
        if problem.time_mode == "free":
            dt_dx = float(expit(x[-1]))
        else:
            s = float(expit(x[-1]))
            dt_dx = float(problem.max_time) * s * (1.0 - s)
        grad[-1] = -dp_dt * dt_dx
    return 1.0 - p, grad


def infidelity(params, problem: TransferProblem) -> float:
    value, _ = infidelity_and_gradient(params, problem)
    return value


def phase_alignment_residual(
    eig: EigenSystem, in_node: int, out_node: int, t: float
) -> tuple[float, float]:
    """Minimal summed mismatch between the output eigenvector row and the
    phase-propagated input row, with the global phase eliminated in closed
    form.

    With A = sum_n v_out,n e^{i t lam_n} v_in,n the residual
    sum_n |v_out,n - e^{i(t lam_n - phi)} v_in,n|^2 is minimized at
    phi = arg(A) where it equals 2 - 2|A|.  Since |A|^2 = p(t) this is the
    exact identity residual = 2 - 2*sqrt(p(t)); it vanishes exactly at
    perfect transfer.
    """
    i = in_node - 1
    o = out_node - 1
    for node in (in_node, out_node):
        if not 1 <= node <= eig.size:
            raise ValueError(f"node {node} out of range 1..{eig.size}")
    a = np.conj(_kernels.amplitudes(eig.evals, eig.vecs, i, o, [float(t)])[0])
    return float(2.0 - 2.0 * abs(a)), float(np.angle(a))
