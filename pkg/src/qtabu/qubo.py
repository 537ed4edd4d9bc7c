"""Per-route TSP QUBOs: build, evaluate, decode.

A route of n customers becomes n*n binary variables x[u,v] ("customer slot u
sits at position v").  Two one-hot penalty families (each customer exactly
once, each position exactly once) carry weight A; travel costs between
consecutive positions carry weight B.  The depot is not a variable: its two
legs enter as linear terms on the first and last position, which cuts the
grid from (n+1)^2 to n^2 variables without moving the argmin, and the
wraparound between the last and first position is dropped because the depot
sits between them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class DecodeError(ValueError):
    """A sampled bitstring does not form a one-hot assignment."""


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty weights: A multiplies the one-hot constraints, B the costs."""

    A: float
    B: float = 1.0

    def __post_init__(self):
        if self.A <= 0 or self.B <= 0:
            raise ValueError(f"penalties must be positive, got A={self.A}, B={self.B}")


def default_penalties(route_costs: np.ndarray) -> PenaltyConfig:
    """B = 1 and A = twice the largest cost on the route (floor 1).

    Doubling keeps A strictly above any single cost with margin against
    accumulated B-terms on short routes; the floor covers degenerate
    all-zero-cost inputs.
    """
    m = float(np.max(route_costs)) if np.size(route_costs) else 0.0
    return PenaltyConfig(A=2.0 * m if m > 0 else 1.0, B=1.0)


class Qubo:
    """Sparse upper-triangular QUBO with a constant offset.

    ``coefficients`` maps (i, j) with i <= j to a real weight; diagonal keys
    (i, i) are the linear terms (x*x = x on binaries).  Zero-valued entries
    are never stored.
    """

    def __init__(self, num_vars: int, coefficients: dict[tuple[int, int], float], offset: float, n: int):
        self.num_vars = num_vars
        # canonical key order: energy summation order (and thus its exact
        # floating-point value) must not depend on construction history
        self.coefficients = dict(sorted(coefficients.items()))
        self.offset = offset
        self.n = n  # grid side: num_vars == n * n

    def var_index(self, u: int, v: int) -> int:
        """Flat index of customer slot u at position v."""
        return u * self.n + v

    def var_pos(self, k: int) -> tuple[int, int]:
        """Inverse of var_index."""
        return divmod(k, self.n)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Split into (linear, row, col, weight) arrays for the kernels."""
        linear = np.zeros(self.num_vars, dtype=np.float64)
        rows, cols, vals = [], [], []
        for (i, j), c in sorted(self.coefficients.items()):
            if i == j:
                linear[i] = c
            else:
                rows.append(i)
                cols.append(j)
                vals.append(c)
        return (
            linear,
            np.array(rows, dtype=np.int32),
            np.array(cols, dtype=np.int32),
            np.array(vals, dtype=np.float64),
        )

    def to_json(self) -> str:
        terms = [[i, j, c] for (i, j), c in sorted(self.coefficients.items())]
        return json.dumps({"num_vars": self.num_vars, "offset": self.offset, "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "Qubo":
        doc = json.loads(text)
        coeffs = {}
        for i, j, c in doc["terms"]:
            key = (int(i), int(j)) if i <= j else (int(j), int(i))
            if c != 0:
                coeffs[key] = coeffs.get(key, 0.0) + float(c)
        num_vars = int(doc["num_vars"])
        n = int(round(num_vars**0.5))
        return cls(num_vars, coeffs, float(doc.get("offset", 0.0)), n)


def build_tsp_qubo(customers, matrix, depot: int = 0, penalties: PenaltyConfig | None = None) -> Qubo:
    """Build the sequencing QUBO for one route.

    ``customers`` are the ids to order; ``matrix`` supplies costs (a
    DistanceMatrix or a plain ndarray indexed by id).  ``penalties``
    defaults to default_penalties over the route's cost submatrix.
    """
    customers = list(customers)
    n = len(customers)
    if n == 0:
        raise ValueError("route must contain at least one customer")
    if len(set(customers)) != n:
        raise ValueError("route customers must be distinct")
    if depot in customers:
        raise ValueError("route customers must exclude the depot")
    entries = getattr(matrix, "entries", matrix)
    idx = [depot] + customers
    sub = np.asarray(entries)[np.ix_(idx, idx)]
    if penalties is None:
        penalties = default_penalties(sub)
    A, B = penalties.A, penalties.B

    coeffs: dict[tuple[int, int], float] = {}
    offset = 0.0

    def add(i: int, j: int, c: float) -> None:
        if c == 0.0:
            return
        key = (i, j) if i <= j else (j, i)
        coeffs[key] = coeffs.get(key, 0.0) + c

    def var(u: int, v: int) -> int:
        return u * n + v

    # one-hot families: (1 - sum x)^2 per customer row and per position column
    for u in range(n):
        offset += A
        for v in range(n):
            add(var(u, v), var(u, v), -A)
        for v1 in range(n):
            for v2 in range(v1 + 1, n):
                add(var(u, v1), var(u, v2), 2.0 * A)
    for v in range(n):
        offset += A
        for u in range(n):
            add(var(u, v), var(u, v), -A)
        for u1 in range(n):
            for u2 in range(u1 + 1, n):
                add(var(u1, v), var(u2, v), 2.0 * A)

    # travel costs between consecutive positions
    for v in range(n - 1):
        for u1 in range(n):
            for u2 in range(n):
                if u1 == u2:
                    continue
                add(var(u1, v), var(u2, v + 1), B * sub[u1 + 1, u2 + 1])

    # depot legs on the first and last position
    for u in range(n):
        leg = B * sub[0, u + 1]
        add(var(u, 0), var(u, 0), leg)
        add(var(u, n - 1), var(u, n - 1), leg)

    coeffs = {k: c for k, c in coeffs.items() if c != 0.0}
    return Qubo(n * n, coeffs, offset, n)


def qubo_energy(qubo: Qubo, bits) -> float:
    """Evaluate offset + linear + quadratic terms over the set bits."""
    bits = np.asarray(bits)
    if bits.shape[0] != qubo.num_vars:
        raise ValueError(f"expected {qubo.num_vars} bits, got {bits.shape[0]}")
    e = qubo.offset
    for (i, j), c in qubo.coefficients.items():
        if bits[i] and (i == j or bits[j]):
            e += c
    return float(e)


def encode_route(order, customers) -> np.ndarray:
    """Bits of the permutation that visits ``order`` (inverse of decode)."""
    n = len(customers)
    slot = {c: u for u, c in enumerate(customers)}
    bits = np.zeros(n * n, dtype=np.uint8)
    for v, c in enumerate(order):
        bits[slot[c] * n + v] = 1
    return bits


def decode_sample(bits, customers) -> list[int]:
    """Turn a one-hot bitstring back into a route (ids in visit order).

    Raises DecodeError naming the first violated constraint: customer rows
    are checked in slot order, then position columns.
    """
    customers = list(customers)
    n = len(customers)
    bits = np.asarray(bits)
    if bits.shape[0] != n * n:
        raise ValueError(f"expected {n * n} bits for {n} customers, got {bits.shape[0]}")
    grid = bits.reshape(n, n)
    row_counts = grid.sum(axis=1)
    for u in range(n):
        if row_counts[u] == 0:
            raise DecodeError(f"city {customers[u]} unassigned")
        if row_counts[u] > 1:
            raise DecodeError(f"city {customers[u]} assigned to {int(row_counts[u])} positions")
    col_counts = grid.sum(axis=0)
    for v in range(n):
        if col_counts[v] == 0:
            raise DecodeError(f"position {v + 1} empty")
        if col_counts[v] > 1:
            raise DecodeError(f"position {v + 1} holds {int(col_counts[v])} cities")
    order = [0] * n
    for u in range(n):
        v = int(np.argmax(grid[u]))
        order[v] = customers[u]
    return order
