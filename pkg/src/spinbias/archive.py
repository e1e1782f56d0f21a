"""Run archives: one JSON document per experiment plus schema'd CSV series.

Archives are deterministic for a fixed seed: wall-clock timing is never
persisted (RunRecord keeps it in memory only) and floats are written with
shortest round-trip repr, so identical seeds give byte-identical JSON and CSV
files regardless of how restarts were scheduled.

Every archive carries a flat ``verification`` table of
(network, node pair, bias, time, infidelity) rows covering each stored
solution; :func:`verify_archive` re-evaluates all of them from scratch.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ._version import __version__
from .dynamics import eigendecompose, transfer_probability
from .network import NetworkSpec, build_reduced_hamiltonian
from .objective import TransferProblem
from .optimize import Ensemble, InitStrategy, RunRecord

FORMAT_VERSION = 1


# -- dict round-trips -------------------------------------------------------


def spec_to_dict(spec: NetworkSpec) -> dict:
    return {"kind": spec.kind, "size": spec.size}


def spec_from_dict(d: dict) -> NetworkSpec:
    return NetworkSpec(kind=d["kind"], size=int(d["size"]))


def problem_to_dict(problem: TransferProblem) -> dict:
    return {
        "network": spec_to_dict(problem.spec),
        "in_node": problem.in_node,
        "out_node": problem.out_node,
        "time_mode": problem.time_mode,
        "fixed_time": problem.fixed_time,
        "max_time": problem.max_time,
        "constraint": problem.constraint,
        "box": list(problem.box) if problem.box else None,
    }


def problem_from_dict(d: dict) -> TransferProblem:
    return TransferProblem(
        spec=spec_from_dict(d["network"]),
        in_node=int(d["in_node"]),
        out_node=int(d["out_node"]),
        time_mode=d["time_mode"],
        fixed_time=d["fixed_time"],
        max_time=d["max_time"],
        constraint=d["constraint"],
        box=tuple(d["box"]) if d.get("box") else None,
    )


def strategy_to_dict(strategy: InitStrategy) -> dict:
    return {
        "kind": strategy.kind,
        "bias_range": list(strategy.bias_range),
        "time_range": list(strategy.time_range),
        "peak_window": strategy.peak_window,
        "peak_threshold": strategy.peak_threshold,
        "seed": strategy.seed,
    }


def strategy_from_dict(d: dict) -> InitStrategy:
    return InitStrategy(
        kind=d["kind"],
        bias_range=tuple(d["bias_range"]),
        time_range=tuple(d["time_range"]),
        peak_window=d["peak_window"],
        peak_threshold=d["peak_threshold"],
        seed=int(d["seed"]),
    )


def run_to_dict(run: RunRecord) -> dict:
    return {
        "index": run.index,
        "seed": run.seed,
        "init": [float(v) for v in run.init_params],
        "bias": [float(v) for v in run.bias],
        "time": float(run.time),
        "infidelity": float(run.infidelity),
        "iterations": run.iterations,
        "converged": run.converged,
    }


def ensemble_to_dict(ensemble: Ensemble) -> dict:
    """Canonical (timing-free, schedule-independent) ensemble serialization."""
    fastest = ensemble.fastest_above(0.99)
    return {
        "problem": problem_to_dict(ensemble.problem),
        "strategy": strategy_to_dict(ensemble.strategy),
        "runs": [run_to_dict(r) for r in ensemble.runs],
        "best_index": ensemble.best_index,
        "fastest_above_0.99": fastest,
        "success_rate_0.99": ensemble.success_rate(0.99),
        "failure_rate_0.9": ensemble.failure_rate(0.9),
    }


# -- archive documents ------------------------------------------------------


def new_archive(experiment: str, config: dict) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "software_version": __version__,
        "experiment": experiment,
        "config": config,
        "results": {},
        "verification": [],
        "csv_files": {},
    }


def add_verification_rows(archive: dict, spec: NetworkSpec, in_node: int, out_node: int, rows):
    """Register (bias, time, infidelity) triples for later re-evaluation."""
    for bias, t, infid in rows:
        archive["verification"].append(
            {
                "network": spec_to_dict(spec),
                "in_node": int(in_node),
                "out_node": int(out_node),
                "bias": [float(v) for v in bias],
                "time": float(t),
                "infidelity": float(infid),
            }
        )


def verify_archive(archive: dict, tol: float = 1e-10) -> list[str]:
    """Re-evaluate every stored solution; returns a list of discrepancies."""
    issues = []
    for i, row in enumerate(archive.get("verification", [])):
        spec = spec_from_dict(row["network"])
        h = build_reduced_hamiltonian(spec, np.array(row["bias"]))
        p = transfer_probability(eigendecompose(h), row["in_node"], row["out_node"], row["time"])
        err = abs((1.0 - p) - row["infidelity"])
        if err > tol:
            issues.append(f"row {i}: stored infidelity off by {err:.3e}")
    return issues


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)


def write_csv(path: Path, header: list[str], rows) -> None:
    """Plain comma-separated text; floats via shortest round-trip repr."""

    def cell(v):
        if isinstance(v, (bool, np.bool_)):
            return "1" if v else "0"
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        if v is None:
            return ""
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_archive(archive: dict, out_dir, csv_tables: dict | None = None) -> Path:
    """Write archive.json plus the given CSV tables into ``out_dir``.

    ``csv_tables`` maps file stem -> (header, rows).  Returns the JSON path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for stem, (header, rows) in (csv_tables or {}).items():
        name = f"{stem}.csv"
        write_csv(out / name, header, rows)
        archive["csv_files"][stem] = name
    path = out / f"{archive['experiment']}.json"
    path.write_text(canonical_json(archive) + "\n")
    return path


def load_archive(path) -> dict:
    with open(path) as f:
        archive = json.load(f)
    if archive.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported archive format version {archive.get('format_version')}")
    return archive
