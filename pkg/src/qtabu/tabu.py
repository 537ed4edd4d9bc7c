"""Tabu search with strategic oscillation and sampler-driven re-routing.

The search walks a relocate / intra-swap / inter-swap neighborhood under
recency-based tabu memory.  A feasible incumbent may step into capacity
infeasibility (and back); the global best only ever holds feasible
solutions.  Periodically, when no global improvement has occurred for
``routing_delay`` iterations, every route of the global best is re-sequenced
through a QUBO sampler and the result becomes the next incumbent.

Neighborhood generation is restricted to customer pairs within the active
nearest-neighbor breadth; diversification toggles that breadth wide, and
intensification clears the tabu list.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .instance import DistanceMatrix, Instance, build_distance_matrix
from .qubo import DecodeError, build_tsp_qubo, decode_sample, default_penalties
from .sampler import best_sample
from .solution import Route, Solution, route_cost, validate

RELOCATE, INTRA_SWAP, INTER_SWAP = 0, 1, 2
_KIND_NAMES = {RELOCATE: "relocate", INTRA_SWAP: "intra_swap", INTER_SWAP: "inter_swap"}


@dataclass(frozen=True)
class Move:
    """One neighborhood step.

    ``src``/``dst`` are route slots in the incumbent's current route list
    (dst None means a new route).  For relocate, ``pos`` is the insertion
    position in dst and ``pos2`` the customer's position in src; for swaps,
    ``pos``/``pos2`` are the positions of c1/c2.
    """

    kind: int
    c1: int
    c2: int | None
    src: int
    dst: int | None
    pos: int
    pos2: int
    delta_cost: float
    delta_excess: float

    @property
    def kind_name(self) -> str:
        return _KIND_NAMES[self.kind]


class TabuList:
    """Recency memory keyed by (customer id, route identity) with expiries.

    Backed by a dense expiry table for vectorized candidate screening; route
    identities are small monotonically increasing integers (0 is a reserved
    never-tabu sentinel).  An attribute added at iteration t with tenure tau
    is tabu through iteration t + tau - 1.
    """

    def __init__(self, n_customers: int, id_capacity: int = 64):
        self._until = np.zeros((n_customers + 1, id_capacity), dtype=np.int64)

    def ensure_capacity(self, route_id: int) -> None:
        cap = self._until.shape[1]
        if route_id >= cap:
            grown = np.zeros((self._until.shape[0], max(route_id + 1, 2 * cap)), dtype=np.int64)
            grown[:, :cap] = self._until
            self._until = grown

    def add(self, customer: int, route_id: int, expiry: int) -> None:
        self.ensure_capacity(route_id)
        self._until[customer, route_id] = expiry

    def expiry(self, customer: int, route_id: int) -> int:
        if route_id >= self._until.shape[1]:
            return 0
        return int(self._until[customer, route_id])

    def is_tabu(self, customer: int, route_id: int, iteration: int) -> bool:
        return self.expiry(customer, route_id) > iteration

    def clear(self) -> None:
        self._until[:, :] = 0

    def entries(self) -> dict[tuple[int, int], int]:
        out = {}
        rows, cols = np.nonzero(self._until)
        for c, r in zip(rows, cols):
            out[(int(c), int(r))] = int(self._until[c, r])
        return out


@dataclass
class SearchParams:
    """Tuning knobs; fraction ranges scale with the customer count N."""

    routing_delay: int = 250
    tenure_range: tuple[float, float] = (0.4, 0.6)
    trigger_range: tuple[float, float] = (0.6, 1.1)
    stop_factor: int = 100
    seed: int = 0
    neighbor_breadth: tuple[int | None, int | None] = (None, None)
    reroute_accept: str = "better"
    time_limit: float | None = None
    max_iterations: int | None = None

    def resolved_breadth(self, n: int) -> tuple[int, int]:
        p_base, p_wide = self.neighbor_breadth
        if p_base is None:
            p_base = min(n, 15)
        if p_wide is None:
            p_wide = n
        if not (1 <= p_base <= p_wide <= n):
            raise ValueError(f"need 1 <= p_base <= p_wide <= N, got ({p_base}, {p_wide}, N={n})")
        return p_base, p_wide


class CandidateSet:
    """Flat arrays of scored moves in canonical deterministic order."""

    def __init__(self, count, kind, c1, c2, src, dst, pos, pos2, dcost, dexc):
        self.count = count
        self.kind = kind
        self.c1 = c1
        self.c2 = c2
        self.src = src
        self.dst = dst
        self.pos = pos
        self.pos2 = pos2
        self.dcost = dcost
        self.dexc = dexc

    def __len__(self) -> int:
        return self.count

    def move(self, i: int) -> Move:
        if not (0 <= i < self.count):
            raise IndexError(i)
        kind = int(self.kind[i])
        dst = int(self.dst[i])
        return Move(
            kind=kind,
            c1=int(self.c1[i]),
            c2=None if kind == RELOCATE else int(self.c2[i]),
            src=int(self.src[i]),
            dst=None if (kind == RELOCATE and dst < 0) else dst,
            pos=int(self.pos[i]),
            pos2=int(self.pos2[i]),
            delta_cost=float(self.dcost[i]),
            delta_excess=float(self.dexc[i]),
        )

    def moves(self) -> list[Move]:
        return [self.move(i) for i in range(self.count)]

    @classmethod
    def from_moves(cls, moves: list[Move]) -> "CandidateSet":
        m = len(moves)
        out = cls(
            m,
            np.array([mv.kind for mv in moves], dtype=np.int8),
            np.array([mv.c1 for mv in moves], dtype=np.int32),
            np.array([-1 if mv.c2 is None else mv.c2 for mv in moves], dtype=np.int32),
            np.array([mv.src for mv in moves], dtype=np.int32),
            np.array([-1 if mv.dst is None else mv.dst for mv in moves], dtype=np.int32),
            np.array([mv.pos for mv in moves], dtype=np.int32),
            np.array([mv.pos2 for mv in moves], dtype=np.int32),
            np.array([mv.delta_cost for mv in moves], dtype=np.float64),
            np.array([mv.delta_excess for mv in moves], dtype=np.float64),
        )
        return out


class SearchState:
    """Everything the main loop mutates; owned by a single run_search call."""

    def __init__(self, instance: Instance, matrix: DistanceMatrix, start: Solution, params: SearchParams):
        n = instance.n_customers
        self.instance = instance
        self.matrix = matrix
        self.params = params
        self.incumbent = start.copy()
        self.rng = random.Random(params.seed)
        self.iteration = 0
        self.non_improving = 0
        self.non_improving_since_reroute = 0
        self.trigger_counter = 0
        self.tabu = TabuList(n)
        self.route_ids = list(range(1, len(start.routes) + 1))
        self.next_route_id = len(start.routes) + 1
        self.trace: list[dict] = []

        feasible = start.total_excess == 0.0
        self.global_best: Solution | None = start.copy() if feasible else None
        self.best_cost: float = start.total_cost if feasible else float("inf")
        self.iterations_to_best = 0

        p_base, p_wide = params.resolved_breadth(n)
        self._close_base = _closeness(matrix, n, p_base)
        self._close_wide = _closeness(matrix, n, p_wide)
        self.breadth_wide = False
        lo, hi = params.trigger_range
        self.trigger_threshold = self.rng.randint(int(lo * n), int(hi * n))
        self.next_trigger_intensify = True

        cap = n * n + n * (n - 1) // 2 + 8
        self._okind = np.zeros(cap, dtype=np.int8)
        self._oc1 = np.zeros(cap, dtype=np.int32)
        self._oc2 = np.zeros(cap, dtype=np.int32)
        self._osrc = np.zeros(cap, dtype=np.int32)
        self._odst = np.zeros(cap, dtype=np.int32)
        self._opos = np.zeros(cap, dtype=np.int32)
        self._opos2 = np.zeros(cap, dtype=np.int32)
        self._odcost = np.zeros(cap, dtype=np.float64)
        self._odexc = np.zeros(cap, dtype=np.float64)

    @property
    def active_close(self) -> np.ndarray:
        return self._close_wide if self.breadth_wide else self._close_base


def _closeness(matrix: DistanceMatrix, n: int, p: int) -> np.ndarray:
    """Symmetric membership mask of p-nearest-neighbor customer pairs."""
    close = np.zeros((n + 1, n + 1), dtype=np.uint8)
    d = matrix.entries
    ids = np.arange(1, n + 1)
    for a in range(1, n + 1):
        dists = d[a, 1 : n + 1]
        order = np.lexsort((ids, dists))
        picked = 0
        for k in order:
            b = int(ids[k])
            if b == a:
                continue
            close[a, b] = 1
            picked += 1
            if picked >= p:
                break
    return np.maximum(close, close.T)


def generate_neighborhood(state: SearchState, instance: Instance, params: SearchParams) -> CandidateSet:
    """Score every admissible move against the incumbent."""
    routes = state.incumbent.routes
    total = sum(len(r.customers) for r in routes)
    cust = np.empty(total, dtype=np.int32)
    rstart = np.empty(len(routes) + 1, dtype=np.int32)
    rload = np.empty(len(routes), dtype=np.float64)
    k = 0
    for i, r in enumerate(routes):
        rstart[i] = k
        for c in r.customers:
            cust[k] = c
            k += 1
        rload[i] = r.load
    rstart[len(routes)] = k
    allow_new = state.incumbent.total_excess > 0.0
    count = _kernels.scan_neighborhood(
        state.matrix.entries, instance.demands, instance.capacity,
        cust, rstart, rload, state.active_close, allow_new,
        state._okind, state._oc1, state._oc2, state._osrc, state._odst,
        state._opos, state._opos2, state._odcost, state._odexc,
    )
    return CandidateSet(
        count, state._okind, state._oc1, state._oc2, state._osrc,
        state._odst, state._opos, state._opos2, state._odcost, state._odexc,
    )


def _candidate_attributes(state: SearchState, cands: CandidateSet):
    """Destination-route tabu attributes per candidate, vectorized.

    A move is tabu when any moved customer's destination route carries an
    active entry: relocate tests (c1, dst); intra-swap tests (c1, r) and
    (c2, r); inter-swap tests (c1, r2) and (c2, r1).  Route id 0 is the
    never-tabu sentinel (covers new-route targets).
    """
    m = cands.count
    ids = np.array(state.route_ids + [0], dtype=np.int64)  # slot -1 -> sentinel
    kind = cands.kind[:m]
    c1 = cands.c1[:m]
    c2 = cands.c2[:m]
    src_ids = ids[cands.src[:m]]
    dst_ids = ids[cands.dst[:m]]

    a1_cust = c1
    a1_route = dst_ids
    a2_cust = np.where(kind == RELOCATE, 0, c2)
    a2_route = np.where(kind == RELOCATE, 0, np.where(kind == INTRA_SWAP, dst_ids, src_ids))

    max_id = int(ids.max()) if ids.size else 0
    state.tabu.ensure_capacity(max_id)
    until = state.tabu._until
    exp1 = until[a1_cust, a1_route]
    exp2 = until[a2_cust, a2_route]
    expiry = np.maximum(exp1, exp2)
    return expiry


def _masked_argmin(key: np.ndarray, mask: np.ndarray) -> int:
    """First-occurrence argmin of key restricted to mask; -1 when empty."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return -1
    return int(idx[np.argmin(key[idx])])


def _materialize(state: SearchState, move: Move) -> Solution:
    """Apply a move to a copy of the incumbent (caches recomputed exactly)."""
    sol = state.incumbent.copy()
    _apply_structural(sol, move, state.instance, state.matrix)
    sol.routes = [r for r in sol.routes if r.customers]
    return sol


def select_next(state: SearchState, cands: CandidateSet) -> Move:
    """Pick the next move per the oscillating evaluation rule.

    Feasible incumbent: the best non-tabu feasible and infeasible
    candidates compete on cost.  Infeasible incumbent: they compete on
    excess instead (so any feasible candidate wins).  Any feasible
    candidate beating the global best updates it, tabu or not
    (aspiration); if every candidate is tabu, an aspirating candidate is
    taken, else the one whose tabu entry expires soonest.
    """
    m = cands.count
    if m == 0:
        raise ValueError("no candidates")
    it = state.iteration
    inc_cost = state.incumbent.total_cost
    inc_exc = state.incumbent.total_excess
    next_cost = inc_cost + cands.dcost[:m]
    next_exc = np.maximum(inc_exc + cands.dexc[:m], 0.0)
    expiry = _candidate_attributes(state, cands)
    tabu = expiry > it
    feas = next_exc <= 0.0

    # aspiration: any feasible candidate strictly under the global best
    asp_mask = feas & (next_cost < state.best_cost)
    asp_idx = _masked_argmin(next_cost, asp_mask)
    if asp_idx >= 0:
        candidate = _materialize(state, cands.move(asp_idx))
        if candidate.total_excess == 0.0 and candidate.total_cost < state.best_cost:
            state.global_best = candidate
            state.best_cost = candidate.total_cost
            state.iterations_to_best = it

    key = next_cost if inc_exc == 0.0 else next_exc
    sbfs = _masked_argmin(key, feas & ~tabu)
    sbis = _masked_argmin(key, ~feas & ~tabu)
    if sbfs >= 0 and sbis >= 0:
        chosen = sbis if key[sbis] < key[sbfs] else sbfs
    elif sbfs >= 0:
        chosen = sbfs
    elif sbis >= 0:
        chosen = sbis
    elif asp_idx >= 0:
        chosen = asp_idx
    else:
        chosen = _masked_argmin(expiry, np.ones(m, dtype=bool))
    return cands.move(chosen)


def _apply_structural(sol: Solution, move: Move, instance: Instance, matrix: DistanceMatrix) -> list[int]:
    """Edit routes in place per the move; refresh touched caches exactly.

    Returns the route slots that were touched (before any empty-route
    removal; the caller handles removal bookkeeping).
    """
    cap = instance.capacity
    routes = sol.routes
    if move.kind == RELOCATE:
        src = routes[move.src]
        c = src.customers.pop(move.pos2)
        if c != move.c1:
            raise AssertionError(f"move desync: expected {move.c1} at position, found {c}")
        if move.dst is None:
            routes.append(Route([c]))
            touched = [move.src, len(routes) - 1]
        else:
            routes[move.dst].customers.insert(move.pos, c)
            touched = [move.src, move.dst]
    elif move.kind == INTRA_SWAP:
        r = routes[move.src]
        a, b = move.pos, move.pos2
        r.customers[a], r.customers[b] = r.customers[b], r.customers[a]
        touched = [move.src]
    else:
        r1, r2 = routes[move.src], routes[move.dst]
        r1.customers[move.pos], r2.customers[move.pos2] = (
            r2.customers[move.pos2],
            r1.customers[move.pos],
        )
        touched = [move.src, move.dst]

    old = {}
    for slot in touched:
        r = routes[slot]
        old[slot] = (r.load, r.cost)
        r.load = float(sum(instance.demands[c] for c in r.customers))
        r.cost = route_cost(r.customers, matrix)
    total = 0.0
    excess = 0.0
    for r in routes:
        if r.customers:
            total += r.cost
            excess += max(0.0, r.load - cap)
    sol.total_cost = total
    sol.total_excess = excess
    return touched


def apply_move(state: SearchState, move: Move, params: SearchParams) -> None:
    """Commit the selected move: edit incumbent, stamp tabu, update best."""
    if len(state.incumbent.routes) != len(state.route_ids):
        raise AssertionError(
            f"route identity desync: {len(state.incumbent.routes)} routes, "
            f"{len(state.route_ids)} ids"
        )
    n = state.instance.n_customers
    lo = int(params.tenure_range[0] * n)
    hi = int(params.tenure_range[1] * n)
    it = state.iteration

    # tabu the moved customers against the routes they are leaving
    if move.kind == RELOCATE:
        stamps = [(move.c1, state.route_ids[move.src])]
    elif move.kind == INTRA_SWAP:
        rid = state.route_ids[move.src]
        stamps = [(move.c1, rid), (move.c2, rid)]
    else:
        stamps = [
            (move.c1, state.route_ids[move.src]),
            (move.c2, state.route_ids[move.dst]),
        ]
    for cust_id, rid in stamps:
        tenure = state.rng.randint(lo, hi)
        state.tabu.add(cust_id, rid, it + tenure)

    _apply_structural(state.incumbent, move, state.instance, state.matrix)
    if move.kind == RELOCATE and move.dst is None:
        state.route_ids.append(state.next_route_id)
        state.next_route_id += 1

    # drop emptied routes together with their identity slots
    kept_routes = []
    kept_ids = []
    for r, rid in zip(state.incumbent.routes, state.route_ids):
        if r.customers:
            kept_routes.append(r)
            kept_ids.append(rid)
    state.incumbent.routes = kept_routes
    state.route_ids = kept_ids

    if state.incumbent.total_excess == 0.0 and state.incumbent.total_cost < state.best_cost:
        state.global_best = state.incumbent.copy()
        state.best_cost = state.incumbent.total_cost
        state.iterations_to_best = it


def trigger_check(state: SearchState, params: SearchParams) -> str | None:
    """Fire intensify/diversify when the stall counter reaches the threshold.

    Strict alternation starting with intensify; the threshold is redrawn
    from [0.6N, 1.1N] after each firing.
    """
    if state.trigger_counter < state.trigger_threshold:
        return None
    if state.next_trigger_intensify:
        state.tabu.clear()
        fired = "intensify"
    else:
        state.breadth_wide = not state.breadth_wide
        fired = "diversify"
    state.next_trigger_intensify = not state.next_trigger_intensify
    n = state.instance.n_customers
    lo, hi = params.trigger_range
    state.trigger_threshold = state.rng.randint(int(lo * n), int(hi * n))
    state.trigger_counter = 0
    return fired


@dataclass
class RerouteResult:
    solution: Solution
    sampler_calls: int
    replaced: int
    failures: int


def quantum_reroute(
    best: Solution,
    instance: Instance,
    matrix: DistanceMatrix,
    sampler,
    penalties_rule=default_penalties,
    accept: str = "better",
    rng: random.Random | None = None,
) -> RerouteResult:
    """Re-sequence every route through the QUBO sampler, one by one.

    Each route keeps its customer set; only the visiting order may change.
    A route is replaced when the best decodable sample is strictly cheaper
    (or unconditionally with accept="always").  Sampler or decode failures
    leave the route untouched.
    """
    entries = matrix.entries
    new_routes: list[list[int]] = []
    calls = 0
    replaced = 0
    failures = 0
    for route in best.routes:
        customers = list(route.customers)
        seed = rng.getrandbits(63) if rng is not None else None
        calls += 1
        try:
            idx = [0] + customers
            sub = entries[np.ix_(idx, idx)]
            qubo = build_tsp_qubo(customers, matrix, depot=0, penalties=penalties_rule(sub))
            sample_set = sampler.sample(qubo, seed=seed)
            order = None
            for s in sample_set:
                try:
                    order = decode_sample(np.array(s.bits, dtype=np.uint8), customers)
                    break
                except DecodeError:
                    continue
            if order is None:
                failures += 1
                new_routes.append(customers)
                continue
        except Exception:
            failures += 1
            new_routes.append(customers)
            continue
        new_cost = route_cost(order, matrix)
        if accept == "always" or new_cost < route.cost:
            new_routes.append(order)
            if order != customers:
                replaced += 1
        else:
            new_routes.append(customers)
    solution = Solution.from_routes(new_routes, instance, matrix)
    return RerouteResult(solution, calls, replaced, failures)


@dataclass
class SearchResult:
    best: Solution
    cost: float
    start_cost: float
    feasible: bool
    iterations: int
    iterations_to_best: int
    wall_ms: float
    reroutes: int
    intensifications: int
    diversifications: int
    stop_reason: str
    trace: list[dict] = field(default_factory=list)


class TraceWriter:
    """Collect events and optionally stream them as JSON lines."""

    def __init__(self, sink=None, clock=None, t0: float = 0.0):
        self.events: list[dict] = []
        self.sink = sink
        self.clock = clock
        self.t0 = t0

    def emit(self, iteration: int, event: str, cost: float, excess: float, **extra) -> None:
        rec = {
            "iteration": iteration,
            "event": event,
            "cost": cost,
            "excess": excess,
            "elapsed_ms": round((self.clock() - self.t0) * 1000.0, 3),
        }
        rec.update(extra)
        self.events.append(rec)
        if self.sink is not None:
            self.sink.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def run_search(
    instance: Instance,
    start: Solution,
    params: SearchParams,
    sampler,
    matrix: DistanceMatrix | None = None,
    trace_sink=None,
    clock=time.perf_counter,
) -> SearchResult:
    """Run the full search from a validated start; return the best found.

    Stops after stop_factor*N consecutive non-improving iterations (or on
    the optional time/iteration limits).  The trace records one move event
    per iteration plus reroute/trigger/new-best events.
    """
    if matrix is None:
        matrix = build_distance_matrix(instance)
    report = validate(start, instance, matrix)
    if not report.ok:
        raise ValueError("start solution invalid: " + "; ".join(report.violations))

    n = instance.n_customers
    state = SearchState(instance, matrix, start, params)
    t0 = clock()
    trace = TraceWriter(trace_sink, clock, t0)
    stop_after = params.stop_factor * n
    reroutes = intensifications = diversifications = 0
    stop_reason = "stalled"

    if state.global_best is not None:
        trace.emit(0, "new_best", state.best_cost, 0.0)

    while True:
        state.iteration += 1
        it = state.iteration
        best_before = state.best_cost

        cands = generate_neighborhood(state, instance, params)
        if cands.count == 0:
            stop_reason = "exhausted"
            break
        move = select_next(state, cands)
        apply_move(state, move, params)

        improved = state.best_cost < best_before
        if improved:
            state.non_improving = 0
            state.non_improving_since_reroute = 0
            state.trigger_counter = 0
        else:
            state.non_improving += 1
            state.non_improving_since_reroute += 1
            state.trigger_counter += 1

        trace.emit(it, "move", state.incumbent.total_cost, state.incumbent.total_excess)
        if improved:
            trace.emit(it, "new_best", state.best_cost, 0.0)

        if (
            state.non_improving_since_reroute >= params.routing_delay
            and state.global_best is not None
        ):
            rr = quantum_reroute(
                state.global_best, instance, matrix, sampler,
                accept=params.reroute_accept, rng=state.rng,
            )
            state.incumbent = rr.solution
            # the old incumbent's routes are gone: give the replacement fresh
            # identities so stale tabu entries can never alias onto them
            state.route_ids = list(
                range(state.next_route_id, state.next_route_id + len(rr.solution.routes))
            )
            state.next_route_id += len(rr.solution.routes)
            state.non_improving_since_reroute = 0
            reroutes += 1
            trace.emit(
                it, "reroute", rr.solution.total_cost, rr.solution.total_excess,
                sampler_calls=rr.sampler_calls, replaced=rr.replaced, failures=rr.failures,
            )
            if rr.solution.total_excess == 0.0 and rr.solution.total_cost < state.best_cost:
                state.global_best = rr.solution.copy()
                state.best_cost = rr.solution.total_cost
                state.iterations_to_best = it
                state.non_improving = 0
                state.trigger_counter = 0
                trace.emit(it, "new_best", state.best_cost, 0.0)

        fired = trigger_check(state, params)
        if fired == "intensify":
            intensifications += 1
            trace.emit(it, "intensify", state.incumbent.total_cost, state.incumbent.total_excess)
        elif fired == "diversify":
            diversifications += 1
            trace.emit(it, "diversify", state.incumbent.total_cost, state.incumbent.total_excess)

        if state.non_improving >= stop_after:
            stop_reason = "stalled"
            break
        if params.max_iterations is not None and it >= params.max_iterations:
            stop_reason = "iteration_limit"
            break
        if params.time_limit is not None and clock() - t0 > params.time_limit:
            stop_reason = "time_limit"
            break

    best = state.global_best if state.global_best is not None else state.incumbent.copy()
    return SearchResult(
        best=best,
        cost=best.total_cost,
        start_cost=start.total_cost,
        feasible=best.total_excess == 0.0,
        iterations=state.iteration,
        iterations_to_best=state.iterations_to_best,
        wall_ms=(clock() - t0) * 1000.0,
        reroutes=reroutes,
        intensifications=intensifications,
        diversifications=diversifications,
        stop_reason=stop_reason,
        trace=trace.events,
    )
