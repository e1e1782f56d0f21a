"""Multistart quasi-Newton minimization of transfer infidelity.

Each restart runs scipy's L-BFGS-B (memory 10, strong-Wolfe line search) on
the exact-gradient objective from an initial point produced by one of the
initialization strategies:

* ``random``                - biases i.i.d. uniform over the bias range,
  times uniform over the time window,
* ``symmetric-random``      - same draws in the reduced orbit space,
* ``chain-peak-times``      - random biases, initial times cycled through the
  peaks of the natural end-to-end transfer of the related chain,
* ``symmetric-chain-peaks`` - both of the above,
* ``patterned``             - symmetric orbit values drawn from {0, lo, hi},
  times cycled through the chain peaks.

All initial points are generated up front from a single seeded generator, so
ensembles are reproducible and independent of how restarts are scheduled.
"""

from __future__ import annotations

import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .dynamics import eigendecompose, find_peaks, probability_series, transfer_probability
from .network import NetworkSpec, build_reduced_hamiltonian
from .objective import TransferProblem, decode, encode, infidelity_and_gradient

STRATEGY_KINDS = (
    "random",
    "symmetric-random",
    "chain-peak-times",
    "symmetric-chain-peaks",
    "patterned",
)
_SYMMETRIC_KINDS = ("symmetric-random", "symmetric-chain-peaks", "patterned")
_PEAK_KINDS = ("chain-peak-times", "symmetric-chain-peaks", "patterned")

# Termination contract for every run.
MAX_ITERATIONS = 2000
GRAD_TOL = 1e-9
FTOL = 1e-12
LBFGS_MEMORY = 10


@dataclass(frozen=True)
class InitStrategy:
    """How restart initial points are drawn."""

    kind: str = "random"
    bias_range: tuple[float, float] = (0.0, 10.0)
    time_range: tuple[float, float] = (1.0, 120.0)
    peak_window: float = 30.0
    peak_threshold: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        lo, hi = self.bias_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError("bias_range must be finite with lo < hi")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one restart."""

    index: int
    seed: int
    init_params: np.ndarray
    bias: np.ndarray
    time: float
    infidelity: float
    iterations: int
    converged: bool
    wall_time: float

    @property
    def fidelity(self) -> float:
        return 1.0 - self.infidelity


@dataclass(frozen=True)
class Ensemble:
    """All restarts of one problem, ordered by restart index."""

    problem: TransferProblem
    strategy: InitStrategy
    runs: list[RunRecord] = field(default_factory=list)

    @property
    def best_index(self) -> int:
        return int(min(range(len(self.runs)), key=lambda i: self.runs[i].infidelity))

    @property
    def best(self) -> RunRecord:
        return self.runs[self.best_index]

    def fastest_above(self, fidelity: float = 0.99) -> int | None:
        """Index of the fastest run with fidelity above the threshold."""
        good = [i for i, r in enumerate(self.runs) if r.fidelity > fidelity]
        if not good:
            return None
        return int(min(good, key=lambda i: self.runs[i].time))

    def success_rate(self, fidelity: float = 0.99) -> float:
        return sum(r.fidelity > fidelity for r in self.runs) / len(self.runs)

    def failure_rate(self, fidelity: float = 0.9) -> float:
        return sum(r.fidelity < fidelity for r in self.runs) / len(self.runs)

    def log_infidelity_histogram(self, bin_width: float = 0.5):
        """Histogram of log10(infidelity) with fixed-width bins (floor 1e-16)."""
        logs = np.log10(np.maximum([r.infidelity for r in self.runs], 1e-16))
        lo = np.floor(logs.min() / bin_width) * bin_width
        hi = np.ceil(logs.max() / bin_width) * bin_width + 0.5 * bin_width
        edges = np.arange(lo, hi + bin_width, bin_width)
        counts, edges = np.histogram(logs, bins=edges)
        return edges, counts


def chain_peak_times(
    k: int, window: float = 30.0, dt: float = 0.01, threshold: float = 0.8
) -> list[float]:
    """Peak times of the natural end-to-end transfer of an unbiased k-chain.

    Falls back to threshold 0.5 and then to the global maximum of the sampled
    trace, so the result is never empty.
    """
    if k < 2:
        raise ValueError("chain must have at least 2 sites")
    spec = NetworkSpec("chain", k)
    eig = eigendecompose(build_reduced_hamiltonian(spec, np.zeros(k)))
    series = probability_series(eig, 1, k, window, dt)
    for thr in (threshold, 0.5):
        peaks = find_peaks(series, thr)
        if peaks:
            return [pk.time for pk in peaks]
    j = int(np.argmax(series.values[1:]) + 1)
    return [float(series.times[j])]


def make_initials(
    problem: TransferProblem, strategy: InitStrategy, count: int, seed: int | None = None
) -> list[np.ndarray]:
    """Draw ``count`` raw initial parameter vectors; deterministic given seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    symmetric_problem = "symmetric" in problem.constraint
    if strategy.kind in _SYMMETRIC_KINDS and not symmetric_problem:
        raise ValueError(f"strategy {strategy.kind!r} requires a symmetric-constrained problem")
    if strategy.kind not in _SYMMETRIC_KINDS and symmetric_problem:
        raise ValueError(f"strategy {strategy.kind!r} does not fit a symmetric problem")

    rng = np.random.default_rng(strategy.seed if seed is None else seed)
    lo, hi = strategy.bias_range
    if "box" in problem.constraint:
        blo, bhi = problem.box
        width = bhi - blo
        lo = max(lo, blo + 1e-9 * width)
        hi = min(hi, bhi - 1e-9 * width)
    peaks = None
    if strategy.kind in _PEAK_KINDS:
        k = problem.distance + 1
        peaks = chain_peak_times(k, strategy.peak_window, 0.01, strategy.peak_threshold)

    initials = []
    for i in range(count):
        if strategy.kind == "patterned":
            vals = rng.choice([0.0, lo, hi], size=problem.n_bias_params)
            if "box" in problem.constraint:
                blo, bhi = problem.box
                vals = np.clip(vals, blo + 1e-9 * (bhi - blo), bhi - 1e-9 * (bhi - blo))
        else:
            vals = rng.uniform(lo, hi, size=problem.n_bias_params)
        if problem.has_time_param:
            if peaks is not None:
                t0 = peaks[i % len(peaks)]
            else:
                t0 = rng.uniform(*strategy.time_range)
            if problem.time_mode == "bounded":
                t0 = min(t0, 0.999999 * problem.max_time)
        else:
            t0 = None
        if "symmetric" in problem.constraint:
            full = np.empty(problem.spec.size)
            for v, orb in zip(vals, problem.orbits()):
                for j in orb:
                    full[j - 1] = v
            initials.append(encode(problem, full, t0))
        else:
            initials.append(encode(problem, vals, t0))
    return initials


def minimize_run(
    problem: TransferProblem,
    init_params,
    index: int = 0,
    seed: int = 0,
    max_iterations: int = MAX_ITERATIONS,
) -> RunRecord:
    """One L-BFGS-B descent from ``init_params``.

    Line-search failure or hitting the iteration cap is reported through
    ``converged=False`` with the best point found, never as an exception.
    """
    x0 = np.asarray(init_params, dtype=float)
    start = _time.perf_counter()
    result = scipy.optimize.minimize(
        infidelity_and_gradient,
        x0,
        args=(problem,),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": max_iterations,
            "ftol": FTOL,
            "gtol": GRAD_TOL,
            "maxcor": LBFGS_MEMORY,
        },
    )
    elapsed = _time.perf_counter() - start
    bias, t = decode(result.x, problem)
    return RunRecord(
        index=index,
        seed=seed,
        init_params=x0,
        bias=bias,
        time=t,
        infidelity=float(result.fun),
        iterations=int(result.nit),
        converged=bool(result.success),
        wall_time=elapsed,
    )


def _run_one(args):
    problem, x0, index, seed = args
    try:
        return minimize_run(problem, x0, index=index, seed=seed)
    except Exception:
        # Record the failed restart at its initial point; the ensemble goes on.
        bias, t = decode(x0, problem)
        eig = eigendecompose(build_reduced_hamiltonian(problem.spec, bias))
        p = transfer_probability(eig, problem.in_node, problem.out_node, t)
        return RunRecord(
            index=index,
            seed=seed,
            init_params=np.asarray(x0, dtype=float),
            bias=bias,
            time=t,
            infidelity=1.0 - p,
            iterations=0,
            converged=False,
            wall_time=0.0,
        )


def run_ensemble(
    problem: TransferProblem,
    strategy: InitStrategy,
    restarts: int,
    seed: int | None = None,
    jobs: int = 1,
) -> Ensemble:
    """Run ``restarts`` independent minimizations and collect them.

    Results are ordered by restart index, so the ensemble is identical for
    any ``jobs`` value.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    root = strategy.seed if seed is None else seed
    initials = make_initials(problem, strategy, restarts, seed=root)
    tasks = [(problem, x0, i, root) for i, x0 in enumerate(initials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, tasks))
    else:
        runs = [_run_one(t) for t in tasks]
    runs.sort(key=lambda r: r.index)
    return Ensemble(problem=problem, strategy=strategy, runs=runs)
