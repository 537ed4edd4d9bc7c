import csv
import io
import json
import random

import pytest

from qtabu import cli
from qtabu.bench import (
    build_start,
    data_path,
    deviation,
    load_bks,
    render_csv,
    render_study_table,
    render_suite_table,
    run_study,
    run_suite,
    solve_once,
)
from qtabu.instance import build_distance_matrix, serialize_instance
from qtabu.sampler import ExactSampler
from qtabu.solution import import_solution, export_solution
from qtabu.tabu import SearchParams

from conftest import brute_cvrp, make_instance, random_instance


# --- deviation ----------------------------------------------------------------


def test_deviation_known_values():
    assert deviation(848.95, 835.26) == pytest.approx(1.64, abs=0.005)
    assert deviation(830.99, 826.14) == pytest.approx(0.59, abs=0.005)
    assert deviation(524.61, 524.61) == 0.0


def test_deviation_rejects_nonpositive_bks():
    with pytest.raises(ValueError, match="bks must be positive"):
        deviation(100.0, 0.0)
    with pytest.raises(ValueError, match="bks must be positive"):
        deviation(100.0, -5.0)


# --- best-known table ---------------------------------------------------------


def test_packaged_bks_table():
    table = load_bks()
    assert table == {
        "CMT1": 524.61,
        "CMT2": 835.26,
        "CMT3": 826.14,
        "CMT4": 1028.42,
        "CMT5": 1291.29,
        "CMT11": 1042.12,
        "CMT12": 819.56,
    }


def test_load_bks_custom_path(tmp_path):
    p = tmp_path / "bks.json"
    p.write_text(json.dumps({"TOY": 42.0}), encoding="utf-8")
    assert load_bks(p) == {"TOY": 42.0}


# --- start construction -------------------------------------------------------


def small():
    inst = make_instance(
        [(0, 0), (10, 0), (12, 0), (0, 9), (0, 11)], [3, 3, 3, 3], capacity=7
    )
    return inst, build_distance_matrix(inst)


def test_build_start_methods(tmp_path):
    inst, m = small()
    cw = build_start("cw", inst, m)
    cl = build_start("cluster", inst, m)
    assert cw.total_excess == 0.0 and cl.total_excess == 0.0

    path = tmp_path / "start.json"
    path.write_text(export_solution(cw, inst), encoding="utf-8")
    imported = build_start(f"import:{path}", inst, m)
    assert imported.total_cost == pytest.approx(cw.total_cost, abs=1e-9)

    with pytest.raises(ValueError, match="unknown start method"):
        build_start("greedy", inst, m)


def test_solve_once_record_fields():
    inst, m = small()
    params = SearchParams(seed=4, routing_delay=40, stop_factor=30)
    result, rec = solve_once(inst, m, "cw", params, ExactSampler())
    assert rec.instance == inst.name
    assert rec.seed == 4
    assert rec.start == "cw"
    assert rec.routing_delay == 40
    assert rec.cost == pytest.approx(result.cost)
    assert rec.feasible
    assert rec.iterations >= rec.iterations_to_best >= 0
    assert rec.wall_ms >= 0.0
    assert rec.reroute_count >= 0
    assert set(rec.to_dict()) == {
        "instance", "seed", "start", "routing_delay", "cost", "feasible",
        "iterations", "iterations_to_best", "wall_ms", "reroute_count",
    }


# --- studies ------------------------------------------------------------------


def study_instance(tmp_path, name="TOY"):
    rng = random.Random(90)
    inst = random_instance(rng, 5)
    text = serialize_instance(inst).replace(inst.name, name, 1)
    path = tmp_path / f"{name.lower()}.vrp"
    path.write_text(text, encoding="utf-8")
    m = build_distance_matrix(inst)
    opt = brute_cvrp(inst, m.entries)
    return path, opt


def base_config(path, opt):
    return {
        "kind": "delay",
        "instance": str(path),
        "delays": [10, 50],
        "qualifying_runs": 2,
        "dev_bound_pct": 2.0,
        "base_seed": 1,
        "bks": opt,
        "sampler": "exact",
        "stop_factor": 40,
        "num_reads": 10,
    }


def test_run_study_report_shape(tmp_path):
    path, opt = study_instance(tmp_path)
    report = run_study(base_config(path, opt))
    assert report["kind"] == "delay"
    assert report["bks"] == opt
    assert len(report["cells"]) == 2
    for cell, delay in zip(report["cells"], (10, 50)):
        assert cell["cell"] == {"delay": delay}
        assert not cell["dnf"]
        assert cell["qualifying"] == 2
        assert len(cell["records"]) == 2
        assert cell["best_cost"] <= cell["mean_cost"] + 1e-9
        assert cell["mean_iterations_to_best"] >= 0
        for rec in cell["records"]:
            assert deviation(rec["cost"], opt) <= 2.0


def test_run_study_is_reproducible(tmp_path):
    path, opt = study_instance(tmp_path)
    strip = lambda report: [
        [{k: v for k, v in r.items() if k != "wall_ms"} for r in cell["records"]]
        for cell in report["cells"]
    ]
    a = run_study(base_config(path, opt))
    b = run_study(base_config(path, opt))
    assert strip(a) == strip(b)


def test_run_study_start_kind(tmp_path):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    config.update({"kind": "start", "starts": ["cw", "cluster"], "routing_delay": 25})
    del config["delays"]
    report = run_study(config)
    assert [c["cell"] for c in report["cells"]] == [{"start": "cw"}, {"start": "cluster"}]
    assert all(not c["dnf"] for c in report["cells"])


def test_run_study_dnf_cell_reported(tmp_path):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    # an unreachable bound: every attempt is spent, the cell is marked, kept
    config.update({"bks": opt / 2.0, "max_attempts": 3, "delays": [10]})
    report = run_study(config)
    cell = report["cells"][0]
    assert cell["dnf"] and cell["qualifying"] == 0 and cell["attempts"] == 3
    assert cell["records"] == []


def test_run_study_zero_runs(tmp_path):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    config["qualifying_runs"] = 0
    report = run_study(config)
    assert all(c["attempts"] == 0 and not c["dnf"] for c in report["cells"])


def test_run_study_rejects_bad_kind(tmp_path):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    config["kind"] = "tenure"
    with pytest.raises(ValueError, match="unknown study kind"):
        run_study(config)


def test_run_study_requires_bks(tmp_path):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    del config["bks"]  # name TOY is not in the packaged table
    with pytest.raises(ValueError, match="no BKS known"):
        run_study(config)


def test_render_study_table_shape(tmp_path):
    path, opt = study_instance(tmp_path)
    report = run_study(base_config(path, opt))
    table = render_study_table(report)
    lines = table.splitlines()
    assert len(lines) == 3  # header + one row per cell
    assert lines[0].split()[:2] == ["Delay", "Runs"]
    assert lines[1].startswith("10")
    assert lines[2].startswith("50")
    assert "DNF" not in table

    report["cells"][1]["qualifying"] = 0
    report["cells"][1]["dnf"] = True
    assert "DNF" in render_study_table(report)


# --- suite --------------------------------------------------------------------


def test_run_suite_and_renderers(tmp_path):
    path, opt = study_instance(tmp_path, name="TOY")
    out = tmp_path / "out"
    report = run_suite(
        [path], {"TOY": opt}, runs=2, base_seed=1,
        sampler_spec="exact", num_reads=10, routing_delay=25, stop_factor=40,
        out_dir=out,
    )
    (row,) = report["rows"]
    assert row["instance"] == "TOY"
    assert row["best_cost"] == pytest.approx(opt, abs=1e-6)  # tiny case solves out
    assert row["dev_pct"] == pytest.approx(0.0, abs=1e-6)
    assert len(row["records"]) == 2

    table = render_suite_table(report)
    assert table.splitlines()[0].split() == ["Instance", "BKS", "Best", "Dev%", "MeanCost", "MeanSecs"]
    assert "TOY" in table

    parsed = list(csv.DictReader(io.StringIO(render_csv(report))))
    assert len(parsed) == 1
    assert parsed[0]["instance"] == "TOY"
    assert float(parsed[0]["best_cost"]) == pytest.approx(row["best_cost"])

    best_file = out / "toy_best.json"
    assert best_file.exists()
    inst, m = None, None  # re-load to confirm the exported best round-trips
    from qtabu.instance import load_instance

    inst = load_instance(str(path))
    m = build_distance_matrix(inst)
    sol = import_solution(best_file.read_text(encoding="utf-8"), inst, m)
    assert sol.total_cost == pytest.approx(row["best_cost"], abs=1e-9)


# --- CLI ----------------------------------------------------------------------


def write_toy(tmp_path):
    path, opt = study_instance(tmp_path)
    return str(path), opt


def test_cli_solve_writes_outputs(tmp_path, capsys):
    path, opt = write_toy(tmp_path)
    sol_path = tmp_path / "sol.json"
    trace_path = tmp_path / "trace.jsonl"
    code = cli.main([
        "solve", "--instance", path, "--sampler", "exact",
        "--stop-factor", "30", "--routing-delay", "20", "--seed", "2",
        "--out", str(sol_path), "--trace", str(trace_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "cost" in out and "feasible" in out

    doc = json.loads(sol_path.read_text(encoding="utf-8"))
    assert doc["cost"] == pytest.approx(opt, abs=1e-6)
    lines = trace_path.read_text(encoding="utf-8").splitlines()
    assert lines
    events = [json.loads(line) for line in lines]
    assert all({"iteration", "event", "cost", "excess", "elapsed_ms"} <= set(e) for e in events)


def test_cli_solve_missing_instance_exits_1(tmp_path, capsys):
    code = cli.main(["solve", "--instance", str(tmp_path / "nope.vrp")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_cli_solve_unreachable_remote_exits_2(tmp_path, capsys):
    path, _ = write_toy(tmp_path)
    code = cli.main([
        "solve", "--instance", path, "--sampler", "remote:tcp:127.0.0.1:9",
    ])
    assert code == 2
    assert "remote sampler error" in capsys.readouterr().err


def test_cli_bench_custom_suite(tmp_path, capsys):
    path, opt = write_toy(tmp_path)
    bks_path = tmp_path / "bks.json"
    bks_path.write_text(json.dumps({"TOY": opt}), encoding="utf-8")
    out_dir = tmp_path / "bench_out"
    code = cli.main([
        "bench", "--suite", path, "--bks", str(bks_path), "--runs", "2",
        "--sampler", "exact", "--stop-factor", "30", "--routing-delay", "20",
        "--out", str(out_dir),
    ])
    assert code == 0
    table = capsys.readouterr().out
    assert "Dev%" in table and "TOY" in table
    report = json.loads((out_dir / "bench_report.json").read_text(encoding="utf-8"))
    assert report["rows"][0]["instance"] == "TOY"
    assert (out_dir / "bench_table.txt").exists()


def test_cli_study_roundtrip(tmp_path, capsys):
    path, opt = study_instance(tmp_path)
    config = base_config(path, opt)
    del config["kind"]
    config_path = tmp_path / "study.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    out_dir = tmp_path / "study_out"
    code = cli.main([
        "study", "--kind", "delay", "--config", str(config_path), "--out", str(out_dir),
    ])
    assert code == 0
    assert "Delay" in capsys.readouterr().out
    report = json.loads((out_dir / "study_delay.json").read_text(encoding="utf-8"))
    assert report["kind"] == "delay"
    assert (out_dir / "study_delay.txt").exists()


def test_cli_qubo_export(tmp_path, capsys):
    path, _ = write_toy(tmp_path)
    out = tmp_path / "route.qubo.json"
    code = cli.main([
        "qubo-export", "--instance", path, "--route", "1,2,3", "--out", str(out),
    ])
    assert code == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["num_vars"] == 9

    assert cli.main([
        "qubo-export", "--instance", path, "--route", "1,two", "--out", str(out),
    ]) == 1
    assert cli.main([
        "qubo-export", "--instance", path, "--route", "1,99", "--out", str(out),
    ]) == 1
    err = capsys.readouterr().err
    assert "bad --route" in err and "unknown customer id 99" in err


def test_cli_kernel_bench(capsys):
    code = cli.main(["kernel-bench", "--size", "16", "--reads", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert "fallback" in out


def test_data_path_resolves_packaged_files():
    for k in (1, 2, 3):
        assert data_path(f"cmt{k:02d}.vrp").exists()
