"""Spin network topologies and their biased Hamiltonians.

Uniformly coupled (J = 1) rings and chains of spin-1/2 sites.  All dynamics
in this package run on the N x N single-excitation Hamiltonian: unit hopping
on the network edges plus the on-site biases on the diagonal.  For small N
the exponentially large XX/Heisenberg model on the full 2^N spin space can
also be built; it serves purely as an independent consistency oracle for the
single-excitation reduction (see :func:`extract_single_excitation_block`).

Node indices are 1-based in every public interface; energies are in units of
the coupling J and times in 1/J.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Memory guard for the 2^N full-space construction.
FULL_SPACE_MAX_SITES = 12

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


@dataclass(frozen=True)
class NetworkSpec:
    """A uniform nearest-neighbour network: ``ring`` or ``chain`` of N sites."""

    kind: str
    size: int
    coupling: float = 1.0

    def __post_init__(self):
        if self.kind not in ("ring", "chain"):
            raise ValueError(f"unknown network kind {self.kind!r}")
        if not isinstance(self.size, int) or self.size < 2:
            raise ValueError("network size must be an integer >= 2")
        if self.coupling != 1.0:
            raise ValueError("couplings are fixed to 1 (energies in units of J)")

    def edges(self) -> list[tuple[int, int]]:
        """Edge list in 0-based site indices, each pair counted once."""
        e = [(i, i + 1) for i in range(self.size - 1)]
        # A 2-ring closes onto the edge that already exists.
        if self.kind == "ring" and self.size > 2:
            e.append((0, self.size - 1))
        return e

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.size)
        for a, b in self.edges():
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.size, self.size))
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1.0
        return a


def check_bias(spec: NetworkSpec, bias) -> np.ndarray:
    """Validate a bias vector against a network: length N, all entries finite."""
    b = np.asarray(bias, dtype=float)
    if b.shape != (spec.size,):
        raise ValueError(f"bias length {b.shape} does not match network size {spec.size}")
    if not np.all(np.isfinite(b)):
        raise ValueError("bias entries must be finite")
    return b


def build_reduced_hamiltonian(spec: NetworkSpec, bias) -> np.ndarray:
    """Single-excitation Hamiltonian: H[n,n] = bias_n, H[m,n] = 1 on edges.

    The returned matrix is exactly symmetric by construction.
    """
    b = check_bias(spec, bias)
    h = spec.adjacency()
    h[np.diag_indices(spec.size)] = b
    return h


def _local_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0.0j]])
    for j in range(n):
        out = np.kron(out, op if j == site else np.eye(2))
    return out


def total_excitation_operator(n: int) -> np.ndarray:
    """sum_n Z_n on the 2^N spin space (diagonal)."""
    diag = np.zeros(2**n)
    for j in range(n):
        z = np.where((np.arange(2**n) >> (n - 1 - j)) & 1, -1.0, 1.0)
        diag += z
    return np.diag(diag)


def build_full_hamiltonian(spec: NetworkSpec, bias, kappa: float = 0.0) -> np.ndarray:
    """Full 2^N spin Hamiltonian: sum_n bias_n Z_n + sum_edges [XX + YY + kappa ZZ].

    Each coupled pair is counted once.  kappa = 0 is pure XX coupling,
    kappa = 1 isotropic Heisenberg.  Only intended as a small-N verification
    oracle; raises for size > FULL_SPACE_MAX_SITES.
    """
    b = check_bias(spec, bias)
    n = spec.size
    if n > FULL_SPACE_MAX_SITES:
        raise ValueError(
            f"full-space construction limited to {FULL_SPACE_MAX_SITES} sites (2^N memory)"
        )
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for j in range(n):
        h += b[j] * _local_operator(_PAULI_Z, j, n)
    for a, c in spec.edges():
        xa = _local_operator(_PAULI_X, a, n)
        xc = _local_operator(_PAULI_X, c, n)
        ya = _local_operator(_PAULI_Y, a, n)
        yc = _local_operator(_PAULI_Y, c, n)
        h += xa @ xc + ya @ yc
        if kappa != 0.0:
            za = _local_operator(_PAULI_Z, a, n)
            zc = _local_operator(_PAULI_Z, c, n)
            h += kappa * (za @ zc)
    herm_resid = np.max(np.abs(h - h.conj().T))
    if herm_resid > 1e-12:
        raise ArithmeticError(f"full Hamiltonian not Hermitian (residual {herm_resid:.2e})")
    return h.real.copy()


def single_excitation_indices(n: int) -> list[int]:
    """Computational-basis indices of the states with site j excited, j = 1..N.

    Site 1 is the most significant bit of the index.
    """
    return [1 << (n - 1 - j) for j in range(n)]


def extract_single_excitation_block(full: np.ndarray, n: int) -> np.ndarray:
    """Restrict a full-space Hamiltonian to the single-excitation subspace.

    Rows/columns are ordered by excitation position.  With the conventions of
    :func:`build_full_hamiltonian` the block relates to the reduced model by

        block = 2 * H_reduced(bias) + diag(sum(bias) - 4*bias_j + kappa*(E - 2*deg_j))

    so hopping comes out at 2J and the effective on-site terms are an affine
    remap of the biases (E is the edge count, deg the node degrees).
    """
    if full.shape != (2**n, 2**n):
        raise ValueError("full-space matrix size does not match site count")
    idx = single_excitation_indices(n)
    return np.asarray(full)[np.ix_(idx, idx)].copy()
