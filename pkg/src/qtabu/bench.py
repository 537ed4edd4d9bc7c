"""Benchmark harness: suite runs, delay/start studies, report rendering.

Reports are plain dicts (JSON-serializable); every renderer is a pure
function of the report, so stored JSON re-renders to identical tables.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .construct import clarke_wright, geometric_cluster_start, import_solution
from .instance import Instance, build_distance_matrix, load_instance
from .sampler import make_sampler
from .solution import Solution
from .tabu import SearchParams, SearchResult, run_search


def data_path(name: str) -> Path:
    """Path of a packaged data file (benchmark instances, BKS table)."""
    return Path(str(resources.files("qtabu").joinpath("data", name)))


def load_bks(path: str | Path | None = None) -> dict[str, float]:
    """Best-known-solution table: instance name -> cost."""
    if path is None:
        path = data_path("bks.json")
    with open(path, encoding="utf-8") as fh:
        table = json.load(fh)
    for name, cost in table.items():
        if not (isinstance(cost, (int, float)) and cost > 0):
            raise ValueError(f"BKS for {name!r} must be positive, got {cost!r}")
    return {name: float(cost) for name, cost in table.items()}


def deviation(cost: float, bks: float) -> float:
    """Percent deviation from the best-known cost."""
    if bks <= 0:
        raise ValueError(f"bks must be positive, got {bks}")
    return 100.0 * (cost - bks) / bks


@dataclass
class RunRecord:
    """One solver run, as stored in reports."""

    instance: str
    seed: int
    start: str
    routing_delay: int
    cost: float
    feasible: bool
    iterations: int
    iterations_to_best: int
    wall_ms: float
    reroute_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def build_start(method: str, instance: Instance, matrix) -> Solution:
    """Construct a starting solution: cw | cluster | import:PATH."""
    if method == "cw":
        return clarke_wright(instance, matrix)
    if method == "cluster":
        return geometric_cluster_start(instance, matrix)
    if method.startswith("import:"):
        path = method[len("import:"):]
        with open(path, encoding="utf-8") as fh:
            return import_solution(fh.read(), instance, matrix)
    raise ValueError(f"unknown start method {method!r} (want cw, cluster, or import:PATH)")


def solve_once(
    instance: Instance,
    matrix,
    start_method: str,
    params: SearchParams,
    sampler,
    trace_sink=None,
) -> tuple[SearchResult, RunRecord]:
    start = build_start(start_method, instance, matrix)
    result = run_search(instance, start, params, sampler, matrix=matrix, trace_sink=trace_sink)
    record = RunRecord(
        instance=instance.name,
        seed=params.seed,
        start=start_method,
        routing_delay=params.routing_delay,
        cost=result.cost,
        feasible=result.feasible,
        iterations=result.iterations,
        iterations_to_best=result.iterations_to_best,
        wall_ms=result.wall_ms,
        reroute_count=result.reroutes,
    )
    return result, record


# --- studies ----------------------------------------------------------------


def run_study(config: dict, sampler_factory=None, progress=None) -> dict:
    """Accumulate qualifying runs per cell and summarize.

    config keys:
      kind: "delay" | "start"
      instance: path to the instance file
      delays: list of routing delays   (kind=delay)
      starts: list of start methods    (kind=start)
      start: start method              (kind=delay; default "cw")
      routing_delay: delay             (kind=start; default 250)
      qualifying_runs: runs to accumulate per cell (0 -> empty report)
      dev_bound_pct: qualifying deviation bound (default 2.0)
      max_attempts: attempt cap per cell (default 4x qualifying_runs)
      base_seed: first seed (successive attempts increment it)
      bks: best-known cost (default: table lookup by instance name)
      sampler: "sa" | "exact" (default "sa"); num_reads; stop_factor

    A cell that cannot accumulate its qualifying runs within the cap is
    marked dnf (still reporting whatever it gathered).
    """
    kind = config.get("kind")
    if kind not in ("delay", "start"):
        raise ValueError(f"unknown study kind {config.get('kind')!r}")
    instance = load_instance(config["instance"])
    matrix = build_distance_matrix(instance)
    bks = config.get("bks")
    if bks is None:
        bks = load_bks().get(instance.name)
    if bks is None:
        raise ValueError(f"no BKS known for {instance.name!r}; set 'bks' in the config")
    wanted = int(config.get("qualifying_runs", 10))
    bound = float(config.get("dev_bound_pct", 2.0))
    max_attempts = int(config.get("max_attempts", max(1, 4 * wanted)))
    base_seed = int(config.get("base_seed", 1))
    stop_factor = int(config.get("stop_factor", 100))
    num_reads = int(config.get("num_reads", 200))

    if kind == "delay":
        cells = [("delay", int(d)) for d in config["delays"]]
        start_default = config.get("start", "cw")
    else:
        cells = [("start", s) for s in config["starts"]]
        delay_default = int(config.get("routing_delay", 250))

    report_cells = []
    for label, value in cells:
        if wanted == 0:
            report_cells.append({"cell": {label: value}, "attempts": 0, "qualifying": 0,
                                 "dnf": False, "records": []})
            continue
        records: list[dict] = []
        attempts = 0
        seed = base_seed
        while len(records) < wanted and attempts < max_attempts:
            params = SearchParams(
                routing_delay=value if label == "delay" else delay_default,
                stop_factor=stop_factor,
                seed=seed,
            )
            sampler = (
                sampler_factory(seed)
                if sampler_factory is not None
                else make_sampler(config.get("sampler", "sa"), num_reads=num_reads)
            )
            start_method = value if label == "start" else start_default
            _, record = solve_once(instance, matrix, start_method, params, sampler)
            attempts += 1
            seed += 1
            dev = deviation(record.cost, bks)
            qualified = record.feasible and dev <= bound
            if progress is not None:
                progress(label, value, record, dev, qualified)
            if qualified:
                records.append(record.to_dict())
        cell = {
            "cell": {label: value},
            "attempts": attempts,
            "qualifying": len(records),
            "dnf": len(records) < wanted,
            "records": records,
        }
        if records:
            cell["mean_iterations_to_best"] = statistics.fmean(r["iterations_to_best"] for r in records)
            cell["mean_wall_ms"] = statistics.fmean(r["wall_ms"] for r in records)
            cell["mean_cost"] = statistics.fmean(r["cost"] for r in records)
            cell["best_cost"] = min(r["cost"] for r in records)
        report_cells.append(cell)

    return {
        "kind": kind,
        "instance": instance.name,
        "bks": bks,
        "qualifying_runs": wanted,
        "dev_bound_pct": bound,
        "cells": report_cells,
        "generated": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def render_study_table(report: dict) -> str:
    """Aligned-text summary of a study report (pure function)."""
    label = "Delay" if report["kind"] == "delay" else "Start"
    header = [label, "Runs", "MeanIterToBest", "MeanCost", "BestCost", "MeanSecs", "Note"]
    rows = [header]
    for cell in report["cells"]:
        value = next(iter(cell["cell"].values()))
        if cell["qualifying"]:
            rows.append([
                str(value),
                f"{cell['qualifying']}/{cell['attempts']}",
                f"{cell['mean_iterations_to_best']:.1f}",
                f"{cell['mean_cost']:.2f}",
                f"{cell['best_cost']:.2f}",
                f"{cell['mean_wall_ms'] / 1000.0:.1f}",
                "DNF" if cell["dnf"] else "",
            ])
        else:
            rows.append([str(value), f"0/{cell['attempts']}", "-", "-", "-", "-", "DNF"])
    return _align(rows)


# --- suite ------------------------------------------------------------------


def run_suite(
    instance_paths: list[str | Path],
    bks_table: dict[str, float],
    runs: int = 3,
    base_seed: int = 1,
    sampler_spec: str = "sa",
    num_reads: int = 200,
    routing_delay: int = 250,
    stop_factor: int = 100,
    out_dir: str | Path | None = None,
    progress=None,
) -> dict:
    """Run each instance `runs` times, keep the best, report deviations."""
    rows = []
    for path in instance_paths:
        instance = load_instance(str(path))
        matrix = build_distance_matrix(instance)
        records = []
        best_result = None
        for k in range(runs):
            params = SearchParams(
                routing_delay=routing_delay, stop_factor=stop_factor, seed=base_seed + k
            )
            sampler = make_sampler(sampler_spec, num_reads=num_reads)
            result, record = solve_once(instance, matrix, "cw", params, sampler)
            records.append(record.to_dict())
            if best_result is None or result.cost < best_result.cost:
                best_result = result
            if progress is not None:
                progress(instance.name, record)
        bks = bks_table.get(instance.name)
        row = {
            "instance": instance.name,
            "bks": bks,
            "best_cost": best_result.cost,
            "mean_cost": statistics.fmean(r["cost"] for r in records),
            "dev_pct": deviation(best_result.cost, bks) if bks else None,
            "mean_wall_ms": statistics.fmean(r["wall_ms"] for r in records),
            "records": records,
        }
        rows.append(row)
        if out_dir is not None:
            from .solution import export_solution

            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{instance.name.lower()}_best.json").write_text(
                export_solution(best_result.best, instance), encoding="utf-8"
            )
    return {"suite": [str(p) for p in instance_paths], "runs": runs, "rows": rows}


def render_suite_table(report: dict) -> str:
    header = ["Instance", "BKS", "Best", "Dev%", "MeanCost", "MeanSecs"]
    rows = [header]
    for row in report["rows"]:
        rows.append([
            row["instance"],
            f"{row['bks']:.2f}" if row["bks"] else "-",
            f"{row['best_cost']:.2f}",
            f"{row['dev_pct']:.2f}" if row["dev_pct"] is not None else "-",
            f"{row['mean_cost']:.2f}",
            f"{row['mean_wall_ms'] / 1000.0:.1f}",
        ])
    return _align(rows)


def render_csv(report: dict) -> str:
    """CSV export of suite rows."""
    import csv
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["instance", "bks", "best_cost", "dev_pct", "mean_cost", "mean_wall_ms"])
    for row in report["rows"]:
        writer.writerow([
            row["instance"], row["bks"], row["best_cost"], row["dev_pct"],
            row["mean_cost"], row["mean_wall_ms"],
        ])
    return buf.getvalue()


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"
