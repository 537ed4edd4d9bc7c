"""Command-line entry points.

Subcommands: solve, bench, study, qubo-export, kernel-bench.
Exit codes: 0 success; 1 input or solver error; 2 remote-backend error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels, bench
from .instance import InstanceError, build_distance_matrix, load_instance
from .qubo import build_tsp_qubo
from .sampler import SamplerError, make_sampler
from .solution import SolutionImportError, export_solution, validate
from .tabu import SearchParams, run_search


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sampler", default="sa", help="sa | exact | remote:tcp:HOST:PORT | remote:cmd:...")
    p.add_argument("--routing-delay", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stop-factor", type=int, default=100)
    p.add_argument("--time-limit", type=float, default=None, help="wall-clock cap in seconds")
    p.add_argument("--reroute-accept", choices=["better", "always"], default="better")
    p.add_argument("--num-reads", type=int, default=200, help="sampler reads per reroute call")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtabu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--start", default="cw", help="cw | cluster | import:PATH")
    p.add_argument("--out", default=None, help="write solution JSON here")
    p.add_argument("--trace", default=None, help="write JSON-lines trace here")
    _add_solver_flags(p)

    p = sub.add_parser("bench", help="run the benchmark suite")
    p.add_argument("--suite", default="cmt", help="'cmt' or comma-separated instance paths")
    p.add_argument("--bks", default=None, help="BKS JSON (default: packaged table)")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--keep", choices=["best"], default="best")
    p.add_argument("--out", default=None, help="directory for best solutions + report")
    _add_solver_flags(p)

    p = sub.add_parser("study", help="delay or starting-solution study")
    p.add_argument("--kind", choices=["delay", "start"], required=True)
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--out", default=None, help="directory for report JSON + table")

    p = sub.add_parser("qubo-export", help="emit the sequencing QUBO for one route")
    p.add_argument("--instance", required=True)
    p.add_argument("--route", required=True, help="comma-separated customer ids")
    p.add_argument("--out", required=True)

    p = sub.add_parser("kernel-bench", help="compare compiled vs pure-Python kernels")
    p.add_argument("--size", type=int, default=100, help="QUBO variables for the anneal timing")
    p.add_argument("--reads", type=int, default=20)
    return parser


def _cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    matrix = build_distance_matrix(instance)
    sampler = make_sampler(args.sampler, num_reads=args.num_reads)
    start = bench.build_start(args.start, instance, matrix)
    params = SearchParams(
        routing_delay=args.routing_delay,
        stop_factor=args.stop_factor,
        seed=args.seed,
        reroute_accept=args.reroute_accept,
        time_limit=args.time_limit,
    )
    sink = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        result = run_search(instance, start, params, sampler, matrix=matrix, trace_sink=sink)
    finally:
        if sink:
            sink.close()
        if hasattr(sampler, "close"):
            sampler.close()
    report = validate(result.best, instance, matrix)
    if not report.ok:
        print("internal error: best solution failed validation", file=sys.stderr)
        for v in report.violations:
            print("  " + v, file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(export_solution(result.best, instance), encoding="utf-8")
    print(
        f"{instance.name}: cost {result.cost:.2f} "
        f"(start {result.start_cost:.2f}, {'feasible' if result.feasible else 'INFEASIBLE'}) "
        f"iterations {result.iterations} (best at {result.iterations_to_best}) "
        f"reroutes {result.reroutes} wall {result.wall_ms / 1000.0:.1f}s [{result.stop_reason}]"
    )
    return 0


def _cmd_bench(args) -> int:
    if args.suite == "cmt":
        paths = [bench.data_path(f"cmt{k:02d}.vrp") for k in (1, 2, 3)]
    else:
        paths = [p for p in args.suite.split(",") if p]
    bks_table = bench.load_bks(args.bks)

    def progress(name, record):
        print(
            f"  {name} seed {record.seed}: cost {record.cost:.2f} "
            f"({record.wall_ms / 1000.0:.1f}s)",
            flush=True,
        )

    report = bench.run_suite(
        paths, bks_table,
        runs=args.runs, base_seed=args.seed, sampler_spec=args.sampler,
        num_reads=args.num_reads, routing_delay=args.routing_delay,
        stop_factor=args.stop_factor, out_dir=args.out, progress=progress,
    )
    table = bench.render_suite_table(report)
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench_report.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
        (out / "bench_table.txt").write_text(table, encoding="utf-8")
    return 0


def _cmd_study(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    config["kind"] = args.kind

    def progress(label, value, record, dev, qualified):
        mark = "ok" if qualified else "discard"
        print(
            f"  {label}={value} seed {record.seed}: cost {record.cost:.2f} "
            f"dev {dev:.2f}% iters-to-best {record.iterations_to_best} [{mark}]",
            flush=True,
        )

    report = bench.run_study(config, progress=progress)
    table = bench.render_study_table(report)
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"study_{args.kind}.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
        (out / f"study_{args.kind}.txt").write_text(table, encoding="utf-8")
    return 0


def _cmd_qubo_export(args) -> int:
    instance = load_instance(args.instance)
    matrix = build_distance_matrix(instance)
    try:
        route = [int(tok) for tok in args.route.split(",") if tok.strip()]
    except ValueError:
        print(f"bad --route {args.route!r}: want comma-separated integers", file=sys.stderr)
        return 1
    for c in route:
        if not (1 <= c <= instance.n_customers):
            print(f"unknown customer id {c}", file=sys.stderr)
            return 1
    qubo = build_tsp_qubo(route, matrix)
    Path(args.out).write_text(qubo.to_json() + "\n", encoding="utf-8")
    print(f"wrote {qubo.num_vars}-variable QUBO ({len(qubo.coefficients)} terms) to {args.out}")
    return 0


def _cmd_kernel_bench(args) -> int:
    from ._kernels import fallback
    from .qubo import Qubo
    from .sampler import AnnealSchedule, _csr_adjacency

    rng = np.random.default_rng(7)
    nv = args.size
    coeffs = {}
    for i in range(nv):
        coeffs[(i, i)] = float(rng.normal())
        for j in rng.choice(np.arange(i + 1, nv), size=min(8, nv - i - 1), replace=False):
            coeffs[(i, int(j))] = float(rng.normal())
    qubo = Qubo(nv, {k: v for k, v in coeffs.items() if v != 0}, 0.0, int(nv**0.5) or 1)
    linear, ptr, idx, val = _csr_adjacency(qubo)
    sched = AnnealSchedule(num_reads=args.reads, seed=11).resolve(qubo)

    results = {}
    impls = [("fallback", fallback)]
    if _kernels.HAVE_COMPILED:
        from ._kernels import _core

        impls.append(("compiled", _core))
    for name, impl in impls:
        bits = np.zeros((sched.num_reads, nv), dtype=np.uint8)
        energy = np.zeros(sched.num_reads, dtype=np.float64)
        t0 = time.perf_counter()
        impl.anneal(linear, ptr, idx, val, qubo.offset, sched.num_reads, sched.sweeps,
                    sched.t_initial, sched.cooling, np.uint64(sched.seed), bits, energy)
        dt = time.perf_counter() - t0
        results[name] = (dt, float(energy.min()))
        print(f"{name:9s} anneal {nv} vars x {args.reads} reads: {dt:.3f}s (best {energy.min():.4f})")
    if len(results) == 2:
        f, c = results["fallback"][0], results["compiled"][0]
        if results["fallback"][1] != results["compiled"][1]:
            print("WARNING: implementations disagree on best energy", file=sys.stderr)
            return 1
        print(f"speedup: {f / c:.0f}x (identical best energies)")
    else:
        print("compiled kernels unavailable; only the fallback was timed")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "study": _cmd_study,
        "qubo-export": _cmd_qubo_export,
        "kernel-bench": _cmd_kernel_bench,
    }
    try:
        return handlers[args.command](args)
    except SamplerError as exc:
        print(f"remote sampler error: {exc}", file=sys.stderr)
        return 2
    except (InstanceError, SolutionImportError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
