"""Command-line interface.

Subcommands: scan-times, optimize, compare-quench, shortest-times,
verify-fullspace, eigenreport.  Every invocation writes one JSON archive plus
CSV series into --out (default ./runs).  Exit codes: 0 success, 2 usage
error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments
from ._version import __version__
from .archive import load_archive, problem_from_dict, spec_from_dict, verify_archive
from .network import NetworkSpec
from .optimize import InitStrategy

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3


def _network_args(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ring", type=int, metavar="N", help="ring of N spins")
    g.add_argument("--chain", type=int, metavar="N", help="chain of N spins")


def _network(args) -> NetworkSpec:
    if args.ring is not None:
        return NetworkSpec("ring", args.ring)
    return NetworkSpec("chain", args.chain)


def _strategy_kind(args, parser) -> tuple[str, bool]:
    kind = args.strategy
    symmetric = args.symmetric or kind in ("symmetric-random", "symmetric-chain-peaks", "patterned")
    if symmetric:
        if kind == "random":
            kind = "symmetric-random"
        elif kind in ("chain-peaks", "chain-peak-times"):
            kind = "symmetric-chain-peaks"
    elif kind in ("chain-peaks",):
        kind = "chain-peak-times"
    return kind, symmetric


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbias",
        description="Static-bias control of single-excitation transfer in spin rings and chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan-times", help="repeated fixed-time optimization over a time grid")
    _network_args(p)
    p.add_argument("--from", dest="from_node", type=int, default=1, metavar="NODE")
    p.add_argument("--to", dest="to_node", type=int, required=True, metavar="NODE")
    p.add_argument("--t-from", type=float, default=1.0)
    p.add_argument("--t-to", type=float, default=30.0)
    p.add_argument("--t-step", type=float, default=0.2)
    p.add_argument("--repeats", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs")

    p = sub.add_parser("optimize", help="multistart optimization of one transfer")
    _network_args(p)
    p.add_argument("--from", dest="from_node", type=int, default=1, metavar="NODE")
    p.add_argument("--to", dest="to_node", type=int, required=True, metavar="NODE")
    p.add_argument(
        "--strategy",
        default="random",
        choices=["random", "symmetric-random", "chain-peaks", "chain-peak-times",
                 "symmetric-chain-peaks", "patterned"],
    )
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--symmetric", action="store_true", help="mirror-symmetric biases")
    p.add_argument("--box", nargs=2, type=float, metavar=("LO", "HI"), help="bias amplitude bounds")
    p.add_argument("--tmax", type=float, help="optimize time subject to t <= TMAX")
    p.add_argument("--fixed-time", type=float, help="optimize biases at this fixed time")
    p.add_argument("--bias-range", nargs=2, type=float, default=[0.0, 10.0], metavar=("LO", "HI"))
    p.add_argument("--time-range", nargs=2, type=float, default=[1.0, 120.0], metavar=("LO", "HI"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs")

    p = sub.add_parser("compare-quench", help="quenched ring vs chain transfer traces")
    p.add_argument("--ring", type=int, required=True, metavar="N")
    p.add_argument("--k", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7], metavar="K")
    p.add_argument("--bias", type=float, default=10.0)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--out", default="runs")

    p = sub.add_parser("shortest-times", help="shortest high-fidelity times per ring size and target")
    p.add_argument("--n-list", type=int, nargs="+", default=list(range(5, 16)), metavar="N")
    p.add_argument("--k-list", type=int, nargs="+", default=None, metavar="K")
    p.add_argument("--threshold", type=float, default=0.99)
    p.add_argument("--restarts", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="runs")

    p = sub.add_parser("verify-fullspace", help="check the 2^N model against the reduced one")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eigenreport", help="eigenstructure report for an archived solution")
    p.add_argument("archive", nargs="?", help="path to an optimize archive JSON")
    p.add_argument("--solution", default="best", help="best | fastest | run index")
    p.add_argument("--ring", type=int, help="analyse an explicit ring instead of an archive")
    p.add_argument("--chain", type=int, help="analyse an explicit chain instead of an archive")
    p.add_argument("--from", dest="from_node", type=int, default=1)
    p.add_argument("--to", dest="to_node", type=int)
    p.add_argument("--bias", type=str, help="comma-separated bias values")
    p.add_argument("--time", type=float, help="evaluation time")
    return parser


def _cmd_scan_times(args, parser) -> int:
    if args.repeats < 1:
        parser.error("--repeats must be >= 1")
    if args.t_step <= 0:
        parser.error("--t-step must be positive")
    out = experiments.scan_times(
        _network(args), args.from_node, args.to_node,
        args.t_from, args.t_to, args.t_step, args.repeats,
        seed=args.seed, jobs=args.jobs, out_dir=args.out,
    )
    env = [(p["t"], p["min_infidelity"]) for p in out["results"]["points"]]
    t_best, best = min(env, key=lambda e: e[1])
    print(f"scan-times: {len(env)} grid points x {args.repeats} repeats")
    print(f"  lowest envelope infidelity {best:.3e} at t={t_best:.4f}")
    print(f"  trapped fraction (infidelity > 0.1): {out['results']['trapped_fraction_0.1']:.3f}")
    print(f"  archive written to {args.out}/scan-times.json")
    return EXIT_OK


def _cmd_optimize(args, parser) -> int:
    kind, symmetric = _strategy_kind(args, parser)
    constraint = "none"
    box = None
    if symmetric and args.box:
        constraint = "symmetric-box"
    elif symmetric:
        constraint = "symmetric"
    elif args.box:
        constraint = "box"
    if args.box:
        box = (args.box[0], args.box[1])
    time_mode, fixed_time, max_time = "free", None, None
    if args.fixed_time is not None and args.tmax is not None:
        parser.error("--fixed-time and --tmax are mutually exclusive")
    if args.fixed_time is not None:
        time_mode, fixed_time = "fixed", args.fixed_time
    elif args.tmax is not None:
        time_mode, max_time = "bounded", args.tmax
    strategy = InitStrategy(
        kind=kind,
        bias_range=tuple(args.bias_range),
        time_range=tuple(args.time_range),
        seed=args.seed,
    )
    try:
        out = experiments.optimize_transfer(
            _network(args), args.from_node, args.to_node, strategy,
            restarts=args.restarts, constraint=constraint, box=box,
            time_mode=time_mode, fixed_time=fixed_time, max_time=max_time,
            jobs=args.jobs, out_dir=args.out,
        )
    except ValueError as err:
        parser.error(str(err))
    best = out["results"]["best"]
    fastest = out["results"]["fastest_above_0.99"]
    print(f"optimize: {args.restarts} restarts, strategy {kind}, constraint {constraint}")
    print(f"  best: infidelity {best['infidelity']:.3e} at t={best['time']:.4f}")
    if fastest is not None:
        print(f"  fastest fidelity>0.99: t={fastest['time']:.4f} "
              f"(infidelity {fastest['infidelity']:.3e})")
    else:
        print("  no run reached fidelity 0.99")
    print(f"  archive written to {args.out}/optimize.json")
    return EXIT_OK


def _cmd_compare_quench(args, parser) -> int:
    if args.ring < 3:
        parser.error("--ring must be at least 3")
    out = experiments.compare_quench(
        args.ring, args.k, bias_value=args.bias, t_max=args.t_max, dt=args.dt, out_dir=args.out
    )
    print(f"compare-quench: ring N={args.ring}, bias {args.bias}")
    for row in out["results"]["comparisons"]:
        off = row["max_peak_offset"]
        print(f"  k={row['k']}: max|p_ring - p_chain| = {row['max_discrepancy']:.4f}, "
              f"peak offset {'%.4f' % off if off is not None else 'n/a'}")
    print(f"  archive written to {args.out}/compare-quench.json")
    return EXIT_OK


def _cmd_shortest_times(args, parser) -> int:
    if not 0 < args.threshold < 1:
        parser.error("--threshold must lie in (0, 1)")
    out = experiments.shortest_times(
        args.n_list, k_list=args.k_list, threshold=args.threshold,
        restarts=args.restarts, seed=args.seed, jobs=args.jobs,
        out_dir=args.out, progress=lambda msg: print(f"  {msg}"),
    )
    print("shortest-times results (N, k, time):")
    for row in out["results"]["entries"]:
        t = row["time"]
        print(f"  N={row['n']:2d} k={row['k']}: {'%.4f' % t if t is not None else 'not found'}")
    print(f"  archive written to {args.out}/shortest-times.json")
    return EXIT_OK


def _cmd_verify_fullspace(args, parser) -> int:
    if args.n_max > 10:
        parser.error("--n-max must be <= 10")
    report = experiments.verify_fullspace(n_max=args.n_max, trials=args.trials, seed=args.seed)
    print(f"verify-fullspace: {report['trials']} trials, N <= {report['n_max']}")
    for name, value in report["residuals"].items():
        print(f"  max {name} residual: {value:.3e}")
    if not report["ok"]:
        print("  FAILED")
        return EXIT_VERIFY
    print("  OK")
    return EXIT_OK


def _cmd_eigenreport(args, parser) -> int:
    if args.archive is not None:
        archive = load_archive(args.archive)
        issues = verify_archive(archive)
        if issues:
            for msg in issues:
                print(f"  verification: {msg}")
            return EXIT_VERIFY
        ens = archive["results"].get("ensemble")
        if ens is None:
            parser.error("archive holds no ensemble")
        problem = problem_from_dict(ens["problem"])
        if args.solution == "best":
            idx = ens["best_index"]
        elif args.solution == "fastest":
            idx = ens["fastest_above_0.99"]
            if idx is None:
                parser.error("archive has no fidelity>0.99 solution")
        else:
            try:
                idx = int(args.solution)
                ens["runs"][idx]
            except (ValueError, IndexError):
                parser.error(f"no such solution {args.solution!r}")
        run = ens["runs"][idx]
        spec = problem.spec
        in_node, out_node = problem.in_node, problem.out_node
        bias, t = np.array(run["bias"]), run["time"]
    else:
        if args.to_node is None or args.bias is None or args.time is None:
            parser.error("without an archive, pass --ring/--chain, --to, --bias and --time")
        spec = _network(args)
        in_node, out_node = args.from_node, args.to_node
        try:
            bias = np.array([float(v) for v in args.bias.split(",")])
        except ValueError:
            parser.error("--bias must be comma-separated numbers")
        t = args.time
    try:
        report = experiments.eigen_report(spec, in_node, out_node, bias, t)
    except ValueError as err:
        parser.error(str(err))
    print(f"eigenreport: {spec.kind} N={spec.size}, {in_node} -> {out_node}, t={t:.4f}")
    print(f"  fidelity p(t)        : {report['fidelity']:.8f}")
    print(f"  sqrt(ITF) / ITF      : {report['sqrt_itf']:.8f} / {report['itf']:.8f}")
    print(f"  condition residual   : {report['condition_max_residual']:.3e} "
          f"({'satisfied' if report['condition_satisfied_1e-2'] else 'not satisfied'} at 1e-2)")
    print(f"  alignment residual   : {report['alignment_residual']:.3e} "
          f"(phase {report['alignment_phase']:.4f})")
    print(f"  overlap signs        : {report['signs']}")
    return EXIT_OK


_COMMANDS = {
    "scan-times": _cmd_scan_times,
    "optimize": _cmd_optimize,
    "compare-quench": _cmd_compare_quench,
    "shortest-times": _cmd_shortest_times,
    "verify-fullspace": _cmd_verify_fullspace,
    "eigenreport": _cmd_eigenreport,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args, parser)
    except ValueError as err:
        parser.error(str(err))


if __name__ == "__main__":
    sys.exit(main())
