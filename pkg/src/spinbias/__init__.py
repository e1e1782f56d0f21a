"""spinbias: static on-site bias control of single-excitation transfer in
uniformly coupled spin rings and chains.

The package finds static potential landscapes that maximize the probability
of moving one excitation between network nodes: exact spectral dynamics,
analytic-gradient multistart quasi-Newton optimization with symmetry and
quench-informed initialization, and eigenvector-overlap analysis of the
solutions.  Hot kernels run in a compiled extension when built, with a numpy
fallback (see spinbias._kernels.backend_name).
"""

from ._kernels import backend_name, compiled_available
from ._version import __version__
from .dynamics import (
    EigenSystem,
    Peak,
    ProbabilitySeries,
    eigendecompose,
    find_peaks,
    probability_series,
    rabi_probability,
    transfer_amplitude,
    transfer_probability,
)
from .eigenstructure import (
    ItfReport,
    check_optimality_condition,
    compute_itf,
    mirror_transfer_expression,
)
from .network import (
    NetworkSpec,
    build_full_hamiltonian,
    build_reduced_hamiltonian,
    check_bias,
    extract_single_excitation_block,
    single_excitation_indices,
    total_excitation_operator,
)
from .objective import (
    TransferProblem,
    decode,
    encode,
    infidelity,
    infidelity_and_gradient,
    phase_alignment_residual,
    symmetry_pairs,
)
from .optimize import (
    Ensemble,
    InitStrategy,
    RunRecord,
    chain_peak_times,
    make_initials,
    minimize_run,
    run_ensemble,
)

__all__ = [
    "__version__",
    "backend_name",
    "compiled_available",
    "NetworkSpec",
    "build_reduced_hamiltonian",
    "build_full_hamiltonian",
    "extract_single_excitation_block",
    "single_excitation_indices",
    "total_excitation_operator",
    "check_bias",
    "EigenSystem",
    "ProbabilitySeries",
    "Peak",
    "eigendecompose",
    "transfer_amplitude",
    "transfer_probability",
    "probability_series",
    "find_peaks",
    "rabi_probability",
    "TransferProblem",
    "symmetry_pairs",
    "decode",
    "encode",
    "infidelity",
    "infidelity_and_gradient",
    "phase_alignment_residual",
    "InitStrategy",
    "RunRecord",
    "Ensemble",
    "chain_peak_times",
    "make_initials",
    "minimize_run",
    "run_ensemble",
    "ItfReport",
    "compute_itf",
    "check_optimality_condition",
    "mirror_transfer_expression",
]
