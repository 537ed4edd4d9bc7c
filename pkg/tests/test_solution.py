import json
import random

import pytest

from qtabu.instance import build_distance_matrix
from qtabu.solution import (
    Route,
    Solution,
    SolutionImportError,
    export_solution,
    import_solution,
    infeasibility,
    is_feasible,
    refresh_caches,
    route_cost,
    route_load,
    solution_cost,
    validate,
)

from conftest import make_instance, random_instance


@pytest.fixture()
def inst():
    return make_instance([(0, 0), (3, 4), (6, 8), (0, 5), (9, 0)], [4, 6, 3, 5], capacity=10)


@pytest.fixture()
def matrix(inst):
    return build_distance_matrix(inst)


def test_route_cost_open_tour(inst, matrix):
    # depot -> 1 -> 2 -> depot
    assert route_cost([1, 2], matrix) == pytest.approx(5 + 5 + 10)
    assert route_cost([1], matrix) == pytest.approx(10)
    assert route_cost([], matrix) == 0.0


def test_route_load(inst, matrix):
    assert route_load([1, 3], inst) == pytest.approx(7)  # demands 4 + 3
    assert route_load([], inst) == 0.0


def test_from_routes_drops_empty(inst, matrix):
    sol = Solution.from_routes([[1, 2], [], [3, 4]], inst, matrix)
    assert [r.customers for r in sol.routes] == [[1, 2], [3, 4]]
    assert sol.total_cost == pytest.approx(
        route_cost([1, 2], matrix) + route_cost([3, 4], matrix)
    )
    assert sol.total_excess == 0.0


def test_feasibility_and_excess(inst, matrix):
    sol = Solution.from_routes([[1, 2, 3]], inst, matrix)  # load 13 > 10
    assert not is_feasible(sol, inst)
    assert infeasibility(sol, inst) == pytest.approx(3)
    assert sol.total_excess == pytest.approx(3)
    ok = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    assert is_feasible(ok, inst)
    assert infeasibility(ok, inst) == 0.0


def test_validate_catches_coverage_errors(inst, matrix):
    missing = Solution.from_routes([[1, 2]], inst, matrix)
    report = validate(missing, inst, matrix)
    assert not report.ok
    assert any("3" in v for v in report.violations)

    dup = Solution.from_routes([[1, 2], [2, 3, 4]], inst, matrix)
    report = validate(dup, inst, matrix)
    assert not report.ok

    unknown = Solution.from_routes([[1, 2, 3, 4]], inst, matrix)
    unknown.routes[0].customers.append(9)
    report = validate(unknown, inst, matrix)
    assert not report.ok


def test_validate_catches_stale_caches(inst, matrix):
    sol = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    sol.routes[0].cost += 1.0
    report = validate(sol, inst, matrix)
    assert not report.ok
    assert any("stale" in v for v in report.violations)

    sol2 = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    sol2.routes[1].load -= 2.0
    assert not validate(sol2, inst, matrix).ok

    good = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    assert validate(good, inst, matrix).ok
    assert validate(good, inst, matrix).violations == []


def test_refresh_caches_recomputes(inst, matrix):
    sol = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    sol.routes[0].customers[:] = [2, 1]
    refresh_caches(sol, inst, matrix)
    assert validate(sol, inst, matrix).ok
    assert solution_cost(sol) == pytest.approx(
        route_cost([2, 1], matrix) + route_cost([3, 4], matrix)
    )


def test_copy_is_deep(inst, matrix):
    sol = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    dup = sol.copy()
    dup.routes[0].customers.append(99)
    dup.routes[0].cost = -1
    assert sol.routes[0].customers == [1, 2]
    assert sol.routes[0].cost != -1


def test_export_import_roundtrip(inst, matrix):
    sol = Solution.from_routes([[1, 2], [3, 4]], inst, matrix)
    blob = export_solution(sol, inst)
    data = json.loads(blob)
    assert data["routes"] == [[1, 2], [3, 4]]
    assert data["feasible"] is True
    assert data["instance"] == inst.name
    back = import_solution(blob, inst, matrix)
    assert [r.customers for r in back.routes] == [[1, 2], [3, 4]]
    assert back.total_cost == pytest.approx(sol.total_cost)
    assert validate(back, inst, matrix).ok


def test_import_recomputes_caches_from_scratch(inst, matrix):
    blob = {"instance": inst.name, "routes": [[2, 1], [4, 3]], "cost": 0.0}
    back = import_solution(json.dumps(blob), inst, matrix)
    assert validate(back, inst, matrix).ok  # stated cost ignored, recomputed


@pytest.mark.parametrize(
    "blob, message",
    [
        ("not json", "JSON"),
        (json.dumps({"instance": "x"}), "routes"),
        (json.dumps({"routes": [[1, 99]]}), "unknown"),
        (json.dumps({"routes": [[1, 1, 2, 3, 4]]}), "more than once"),
        (json.dumps({"routes": [[1, 2]]}), "not covered"),
    ],
)
def test_import_rejections(inst, matrix, blob, message):
    with pytest.raises(SolutionImportError, match=message):
        import_solution(blob, inst, matrix)


def test_import_warns_on_infeasible(inst, matrix, caplog):
    blob = json.dumps({"routes": [[1, 2, 3, 4]]})  # load 18 > 10
    with caplog.at_level("WARNING"):
        sol = import_solution(blob, inst, matrix)
    assert sol.total_excess > 0
    assert any("infeasible" in rec.message.lower() for rec in caplog.records)


def test_costs_match_fresh_recompute_randomized():
    rng = random.Random(123)
    for _ in range(25):
        inst = random_instance(rng, rng.randint(3, 8))
        matrix = build_distance_matrix(inst)
        customers = list(inst.customers)
        rng.shuffle(customers)
        cut = rng.randint(1, len(customers))
        routes = [customers[:cut], customers[cut:]]
        sol = Solution.from_routes(routes, inst, matrix)
        assert sol.total_cost == pytest.approx(
            sum(route_cost(r.customers, matrix) for r in sol.routes), abs=1e-9
        )
        # structural validity is independent of capacity feasibility
        assert validate(sol, inst, matrix).ok
