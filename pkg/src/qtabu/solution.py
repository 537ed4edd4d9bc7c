"""Route sets and their evaluation: cost, feasibility, capacity excess.

A Solution is value-like: copy() gives an independent object, and all cached
quantities (route loads/costs, totals) can be rebuilt from scratch at any
time.  The search mutates only its own working copy; everything handed
outward is a fresh snapshot.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .instance import DistanceMatrix, Instance

log = logging.getLogger(__name__)


class SolutionImportError(ValueError):
    """Raised when imported solution JSON is malformed or inconsistent."""


@dataclass
class Route:
    """One vehicle tour: depot -> customers -> depot (depot implicit)."""

    customers: list[int]
    load: float = 0.0
    cost: float = 0.0

    def copy(self) -> "Route":
        return Route(list(self.customers), self.load, self.cost)


@dataclass
class Solution:
    """A set of routes covering every customer exactly once."""

    routes: list[Route] = field(default_factory=list)
    total_cost: float = 0.0
    total_excess: float = 0.0

    def copy(self) -> "Solution":
        return Solution([r.copy() for r in self.routes], self.total_cost, self.total_excess)

    @classmethod
    def from_routes(
        cls, route_lists: list[list[int]], instance: Instance, matrix: DistanceMatrix
    ) -> "Solution":
        """Build a Solution with caches computed; empty routes are dropped."""
        sol = cls([Route(list(r)) for r in route_lists if r])
        refresh_caches(sol, instance, matrix)
        return sol


def route_cost(customers: list[int], matrix: DistanceMatrix) -> float:
    """Length of depot -> customers in order -> depot."""
    if not customers:
        return 0.0
    entries = matrix.entries
    total = entries[0, customers[0]]
    for a, b in zip(customers, customers[1:]):
        total += entries[a, b]
    total += entries[customers[-1], 0]
    return float(total)


def route_load(customers: list[int], instance: Instance) -> float:
    return float(sum(instance.demands[c] for c in customers))


def refresh_caches(solution: Solution, instance: Instance, matrix: DistanceMatrix) -> None:
    """Recompute every cached load/cost/total from scratch."""
    cap = instance.capacity
    total = 0.0
    excess = 0.0
    for route in solution.routes:
        route.load = route_load(route.customers, instance)
        route.cost = route_cost(route.customers, matrix)
        total += route.cost
        excess += max(0.0, route.load - cap)
    solution.total_cost = total
    solution.total_excess = excess


def solution_cost(solution: Solution) -> float:
    return solution.total_cost


def is_feasible(solution: Solution, instance: Instance) -> bool:
    """True iff every route load is within capacity."""
    return all(route.load <= instance.capacity for route in solution.routes)


def infeasibility(solution: Solution, instance: Instance) -> float:
    """Total capacity excess: sum over routes of max(0, load - Q)."""
    cap = instance.capacity
    return float(sum(max(0.0, route.load - cap) for route in solution.routes))


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str]


def validate(solution: Solution, instance: Instance, matrix: DistanceMatrix) -> ValidationReport:
    """Check coverage, id validity, and cache consistency.

    Violations are returned as human-readable strings; an empty list means
    the solution is structurally sound (it may still be infeasible on
    capacity, which is not a structural violation).
    """
    violations: list[str] = []
    n = instance.n_customers
    seen: dict[int, int] = {}
    for ri, route in enumerate(solution.routes):
        if not route.customers:
            violations.append(f"route {ri} is empty (empty routes must be dropped)")
        for c in route.customers:
            if not (1 <= c <= n):
                violations.append(f"route {ri}: unknown customer id {c}")
                continue
            seen[c] = seen.get(c, 0) + 1
    for c in range(1, n + 1):
        count = seen.get(c, 0)
        if count == 0:
            violations.append(f"customer {c} is not visited")
        elif count > 1:
            violations.append(f"customer {c} visited {count} times")
    if not violations:
        cap = instance.capacity
        total = 0.0
        excess = 0.0
        for ri, route in enumerate(solution.routes):
            load = route_load(route.customers, instance)
            cost = route_cost(route.customers, matrix)
            if abs(load - route.load) > 1e-9:
                violations.append(f"route {ri}: stale load cache {route.load:g} != {load:g}")
            if abs(cost - route.cost) > 1e-9:
                violations.append(f"route {ri}: stale cost cache {route.cost:g} != {cost:g}")
            total += cost
            excess += max(0.0, load - cap)
        if abs(total - solution.total_cost) > 1e-9:
            violations.append(f"stale total_cost cache {solution.total_cost:g} != {total:g}")
        if abs(excess - solution.total_excess) > 1e-9:
            violations.append(f"stale total_excess cache {solution.total_excess:g} != {excess:g}")
    return ValidationReport(not violations, violations)


# --- JSON export / import ---------------------------------------------------


def export_solution(solution: Solution, instance: Instance) -> str:
    """Serialize a Solution to JSON (routes, cost, feasibility)."""
    doc = {
        "instance": instance.name,
        "routes": [list(r.customers) for r in solution.routes],
        "cost": solution.total_cost,
        "feasible": solution.total_excess == 0.0,
        "excess": solution.total_excess,
    }
    return json.dumps(doc, indent=2)


def import_solution(text: str, instance: Instance, matrix: DistanceMatrix) -> Solution:
    """Parse solution JSON and rebuild caches against this instance.

    Cost and feasibility fields in the file are ignored in favor of local
    recomputation.  Coverage violations and unknown ids are errors; an
    infeasible (overloaded) import is accepted, since the search's
    oscillation phase can repair it, but logged.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SolutionImportError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "routes" not in doc:
        raise SolutionImportError("missing required field 'routes'")
    routes = doc["routes"]
    if not isinstance(routes, list) or not all(isinstance(r, list) for r in routes):
        raise SolutionImportError("'routes' must be a list of customer id lists")
    n = instance.n_customers
    seen: set[int] = set()
    for r in routes:
        for c in r:
            if not isinstance(c, int) or not (1 <= c <= n):
                raise SolutionImportError(f"unknown customer id {c!r}")
            if c in seen:
                raise SolutionImportError(f"customer {c} appears more than once")
            seen.add(c)
    missing = [c for c in range(1, n + 1) if c not in seen]
    if missing:
        raise SolutionImportError(f"customers not covered: {missing}")
    sol = Solution.from_routes(routes, instance, matrix)
    if sol.total_excess > 0:
        log.warning(
            "imported solution is infeasible (excess %g); search can repair it",
            sol.total_excess,
        )
    return sol
