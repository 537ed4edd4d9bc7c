"""Starting solutions: Clarke-Wright savings and geometric clustering.

Both constructors are deterministic (ties broken lexicographically) and
always return feasible solutions.  Externally produced solutions enter
through import_solution (re-exported from the solution module), which
tolerates infeasibility since the search can repair it.
"""

from __future__ import annotations

import numpy as np

from .instance import DistanceMatrix, Instance
from .solution import Solution, import_solution  # noqa: F401  (re-export)


def clarke_wright(instance: Instance, matrix: DistanceMatrix) -> Solution:
    """Parallel savings construction.

    Start from singleton routes and repeatedly apply the largest saving
    s(i,j) = c(0,i) + c(0,j) - c(i,j) that merges two distinct routes at
    depot-adjacent endpoints without exceeding capacity.  Ties break on
    (i, j) to keep the output reproducible.
    """
    n = instance.n_customers
    d = matrix.entries
    demands = instance.demands

    savings = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            s = d[0, i] + d[0, j] - d[i, j]
            if s > 0:
                savings.append((s, i, j))
    savings.sort(key=lambda t: (-t[0], t[1], t[2]))

    routes: dict[int, list[int]] = {c: [c] for c in range(1, n + 1)}
    loads: dict[int, float] = {c: float(demands[c]) for c in range(1, n + 1)}
    route_of = {c: c for c in range(1, n + 1)}

    for _, i, j in savings:
        ri, rj = route_of[i], route_of[j]
        if ri == rj:
            continue
        a, b = routes[ri], routes[rj]
        if loads[ri] + loads[rj] > instance.capacity:
            continue
        # both customers must sit next to the depot in their current routes
        if i != a[0] and i != a[-1]:
            continue
        if j != b[0] and j != b[-1]:
            continue
        if i == a[0]:
            a.reverse()
        if j == b[-1]:
            b.reverse()
        a.extend(b)
        loads[ri] += loads[rj]
        for c in b:
            route_of[c] = ri
        del routes[rj], loads[rj]

    ordered = []
    emitted = set()
    for c in range(1, n + 1):
        r = route_of[c]
        if r not in emitted:
            emitted.add(r)
            ordered.append(routes[r])
    return Solution.from_routes(ordered, instance, matrix)


def geometric_cluster_start(instance: Instance, matrix: DistanceMatrix) -> Solution:
    """Capacity-bounded geometric clustering, then nearest-neighbor routes.

    Each cluster is seeded at the farthest-from-depot unassigned customer
    and grown by repeatedly adding the customer nearest to the cluster's
    centroid until the next addition would exceed capacity.  One relocation
    sweep then moves customers to strictly closer centroids where capacity
    allows.  Every cluster is sequenced nearest-neighbor from the depot.
    """
    n = instance.n_customers
    coords = instance.coords
    demands = instance.demands
    cap = instance.capacity
    depot_dist = matrix.entries[0]

    unassigned = set(range(1, n + 1))
    clusters: list[list[int]] = []
    loads: list[float] = []

    while unassigned:
        seed = max(unassigned, key=lambda c: (depot_dist[c], -c))
        unassigned.remove(seed)
        members = [seed]
        load = float(demands[seed])
        centroid = coords[seed].copy()
        while unassigned:
            best = min(
                unassigned,
                key=lambda c: (float(np.hypot(*(coords[c] - centroid))), c),
            )
            if load + demands[best] > cap:
                break
            members.append(best)
            unassigned.remove(best)
            load += float(demands[best])
            centroid = coords[members].mean(axis=0)
        clusters.append(members)
        loads.append(load)

    centroids = [coords[m].mean(axis=0) for m in clusters]
    cluster_of = {}
    for k, members in enumerate(clusters):
        for c in members:
            cluster_of[c] = k

    # one relocation sweep: move to a strictly closer centroid if it fits
    for c in range(1, n + 1):
        k = cluster_of[c]
        here = float(np.hypot(*(coords[c] - centroids[k])))
        best_k, best_d = k, here
        for k2 in range(len(clusters)):
            if k2 == k:
                continue
            d2 = float(np.hypot(*(coords[c] - centroids[k2])))
            if d2 < best_d and loads[k2] + demands[c] <= cap:
                best_k, best_d = k2, d2
        if best_k != k:
            clusters[k].remove(c)
            clusters[best_k].append(c)
            loads[k] -= float(demands[c])
            loads[best_k] += float(demands[c])
            cluster_of[c] = best_k
            for kk in (k, best_k):
                if clusters[kk]:
                    centroids[kk] = coords[clusters[kk]].mean(axis=0)

    d = matrix.entries
    routes = []
    for members in clusters:
        if not members:
            continue
        remaining = set(members)
        seq = []
        current = 0
        while remaining:
            nxt = min(remaining, key=lambda c: (d[current, c], c))
            seq.append(nxt)
            remaining.remove(nxt)
            current = nxt
        routes.append(seq)
    return Solution.from_routes(routes, instance, matrix)
