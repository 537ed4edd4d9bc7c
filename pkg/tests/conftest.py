"""Shared fixtures and brute-force oracles."""

from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from qtabu.bench import data_path
from qtabu.instance import Instance, Location, build_distance_matrix, load_instance


def make_instance(coords, demands, capacity, name="test") -> Instance:
    """Build an instance from (x, y) pairs; coords[0] is the depot."""
    locations = [Location(0, float(coords[0][0]), float(coords[0][1]), 0.0)]
    for k, ((x, y), d) in enumerate(zip(coords[1:], demands), start=1):
        locations.append(Location(k, float(x), float(y), float(d)))
    return Instance(name, capacity, locations)


def random_instance(rng: random.Random, n: int, capacity=None, name="rand") -> Instance:
    coords = [(rng.uniform(0, 100), rng.uniform(0, 100)) for _ in range(n + 1)]
    demands = [rng.randint(1, 10) for _ in range(n)]
    if capacity is None:
        capacity = max(demands) + rng.randint(5, 20)
    return make_instance(coords, demands, capacity, name)


def brute_tsp(customers, entries) -> tuple[float, list[int]]:
    """Cheapest depot-anchored open tour over the given customers."""
    best_cost, best_order = float("inf"), None
    for perm in itertools.permutations(customers):
        cost = entries[0, perm[0]]
        for a, b in zip(perm, perm[1:]):
            cost += entries[a, b]
        cost += entries[perm[-1], 0]
        if cost < best_cost:
            best_cost, best_order = cost, list(perm)
    return best_cost, best_order


def _partitions(items):
    """All set partitions of items (Bell-number enumeration)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1 :]
        yield [[first]] + part


def brute_cvrp(instance: Instance, entries) -> float:
    """Optimal CVRP cost by partition + permutation enumeration (N <= 7)."""
    customers = list(range(1, instance.n_customers + 1))
    demands = instance.demands
    best = float("inf")
    for part in _partitions(customers):
        if any(sum(demands[c] for c in block) > instance.capacity for block in part):
            continue
        cost = sum(brute_tsp(block, entries)[0] for block in part)
        if cost < best:
            best = cost
    return best


@pytest.fixture(scope="session")
def cmt1():
    instance = load_instance(str(data_path("cmt01.vrp")))
    return instance, build_distance_matrix(instance)


@pytest.fixture(scope="session")
def cmt2():
    instance = load_instance(str(data_path("cmt02.vrp")))
    return instance, build_distance_matrix(instance)


@pytest.fixture(scope="session")
def cmt3():
    instance = load_instance(str(data_path("cmt03.vrp")))
    return instance, build_distance_matrix(instance)


@pytest.fixture()
def small_instance():
    """5 customers in two natural clusters around a central depot."""
    coords = [(50, 50), (10, 10), (12, 14), (8, 16), (90, 88), (88, 92)]
    demands = [3, 4, 2, 5, 4]
    return make_instance(coords, demands, capacity=10, name="small5")
