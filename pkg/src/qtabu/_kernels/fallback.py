"""Pure-Python kernels, arithmetic-identical to the compiled versions.

Every floating-point expression here mirrors _core.pyx operation for
operation, and both draw from the same splitmix64 stream, so results are
bit-identical across the two implementations (only speed differs).
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def anneal(linear, nbr_ptr, nbr_idx, nbr_val, offset, num_reads, sweeps, t0, cooling, seed, out_bits, out_energy):
    """Single-bit-flip Metropolis annealing, geometric cooling.

    Runs num_reads independent restarts off one sequential RNG stream and
    writes final states and energies into out_bits / out_energy.
    """
    nv = len(linear)
    lin = [float(v) for v in linear]
    ptr = [int(v) for v in nbr_ptr]
    idx = [int(v) for v in nbr_idx]
    val = [float(v) for v in nbr_val]
    state = int(seed) & _MASK

    def nxt():
        nonlocal state
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return (z ^ (z >> 31)) & _MASK

    for r in range(num_reads):
        x = [0] * nv
        for k in range(nv):
            x[k] = nxt() >> 63
        field = lin[:]
        for k in range(nv):
            if x[k]:
                for p in range(ptr[k], ptr[k + 1]):
                    field[idx[p]] += val[p]
        e = offset
        for k in range(nv):
            if x[k]:
                e += lin[k] + 0.5 * (field[k] - lin[k])
        t = t0
        for _ in range(sweeps):
            for k in range(nv):
                delta = -field[k] if x[k] else field[k]
                if delta <= 0.0:
                    flip = True
                elif delta > 40.0 * t:
                    flip = False
                else:
                    u = (nxt() >> 11) * _INV_2_53
                    flip = u < math.exp(-delta / t)
                if flip:
                    x[k] ^= 1
                    if x[k]:
                        for p in range(ptr[k], ptr[k + 1]):
                            field[idx[p]] += val[p]
                    else:
                        for p in range(ptr[k], ptr[k + 1]):
                            field[idx[p]] -= val[p]
                    e += delta
            t *= cooling
        for k in range(nv):
            out_bits[r, k] = x[k]
        out_energy[r] = e


def scan_neighborhood(dist, demand, cap, cust, rstart, rload, close, allow_new, okind, oc1, oc2, osrc, odst, opos, opos2, odcost, odexc):
    """Enumerate relocate / intra-swap / inter-swap candidates.

    Emits candidates in the canonical order (relocates by source route and
    position, then intra-swaps, then inter-swaps) into the preallocated
    output arrays; returns the count.
    """
    nr = len(rstart) - 1
    m = 0
    cap = float(cap)

    # relocate: move one customer to its best insertion in another route
    for src in range(nr):
        s0 = rstart[src]
        s1 = rstart[src + 1]
        length = s1 - s0
        exc_src_before = rload[src] - cap
        if exc_src_before < 0.0:
            exc_src_before = 0.0
        for ip in range(s0, s1):
            c = cust[ip]
            prev = 0 if ip == s0 else cust[ip - 1]
            nxt_ = 0 if ip == s1 - 1 else cust[ip + 1]
            rem = dist[prev, nxt_] - dist[prev, c] - dist[c, nxt_]
            after = rload[src] - demand[c] - cap
            if after < 0.0:
                after = 0.0
            dexc_src = after - exc_src_before
            for dst in range(nr):
                if dst == src:
                    continue
                d0 = rstart[dst]
                d1 = rstart[dst + 1]
                elig = False
                for jp in range(d0, d1):
                    if close[c, cust[jp]]:
                        elig = True
                        break
                if not elig:
                    continue
                ld = d1 - d0
                best = math.inf
                bestp = 0
                for p in range(ld + 1):
                    a = 0 if p == 0 else cust[d0 + p - 1]
                    b = 0 if p == ld else cust[d0 + p]
                    ins = dist[a, c] + dist[c, b] - dist[a, b]
                    if ins < best:
                        best = ins
                        bestp = p
                exc_dst_before = rload[dst] - cap
                if exc_dst_before < 0.0:
                    exc_dst_before = 0.0
                exc_dst_after = rload[dst] + demand[c] - cap
                if exc_dst_after < 0.0:
                    exc_dst_after = 0.0
                okind[m] = 0
                oc1[m] = c
                oc2[m] = -1
                osrc[m] = src
                odst[m] = dst
                opos[m] = bestp
                opos2[m] = ip - s0
                odcost[m] = rem + best
                odexc[m] = dexc_src + (exc_dst_after - exc_dst_before)
                m += 1
            if allow_new and length > 1:
                okind[m] = 0
                oc1[m] = c
                oc2[m] = -1
                osrc[m] = src
                odst[m] = -1
                opos[m] = 0
                opos2[m] = ip - s0
                odcost[m] = rem + dist[0, c] + dist[c, 0]
                odexc[m] = dexc_src
                m += 1

    # intra-route swap of two positions
    for r in range(nr):
        s0 = rstart[r]
        s1 = rstart[r + 1]
        for i in range(s0, s1):
            c1 = cust[i]
            for j in range(i + 1, s1):
                c2 = cust[j]
                if not close[c1, c2]:
                    continue
                prev_i = 0 if i == s0 else cust[i - 1]
                next_j = 0 if j == s1 - 1 else cust[j + 1]
                if j == i + 1:
                    delta = (
                        dist[prev_i, c2] + dist[c1, next_j]
                        - dist[prev_i, c1] - dist[c2, next_j]
                    )
                else:
                    next_i = cust[i + 1]
                    prev_j = cust[j - 1]
                    delta = (
                        dist[prev_i, c2] + dist[c2, next_i] + dist[prev_j, c1] + dist[c1, next_j]
                        - dist[prev_i, c1] - dist[c1, next_i] - dist[prev_j, c2] - dist[c2, next_j]
                    )
                okind[m] = 1
                oc1[m] = c1
                oc2[m] = c2
                osrc[m] = r
                odst[m] = r
                opos[m] = i - s0
                opos2[m] = j - s0
                odcost[m] = delta
                odexc[m] = 0.0
                m += 1

    # inter-route swap of two customers
    for r1 in range(nr):
        a0 = rstart[r1]
        a1 = rstart[r1 + 1]
        exc1_before = rload[r1] - cap
        if exc1_before < 0.0:
            exc1_before = 0.0
        for r2 in range(r1 + 1, nr):
            b0 = rstart[r2]
            b1 = rstart[r2 + 1]
            exc2_before = rload[r2] - cap
            if exc2_before < 0.0:
                exc2_before = 0.0
            for i in range(a0, a1):
                c1 = cust[i]
                prev_i = 0 if i == a0 else cust[i - 1]
                next_i = 0 if i == a1 - 1 else cust[i + 1]
                base_i = dist[prev_i, c1] + dist[c1, next_i]
                for j in range(b0, b1):
                    c2 = cust[j]
                    if not close[c1, c2]:
                        continue
                    prev_j = 0 if j == b0 else cust[j - 1]
                    next_j = 0 if j == b1 - 1 else cust[j + 1]
                    delta = (
                        dist[prev_i, c2] + dist[c2, next_i] - base_i
                        + dist[prev_j, c1] + dist[c1, next_j]
                        - dist[prev_j, c2] - dist[c2, next_j]
                    )
                    exc1_after = rload[r1] - demand[c1] + demand[c2] - cap
                    if exc1_after < 0.0:
                        exc1_after = 0.0
                    exc2_after = rload[r2] - demand[c2] + demand[c1] - cap
                    if exc2_after < 0.0:
                        exc2_after = 0.0
                    okind[m] = 2
                    oc1[m] = c1
                    oc2[m] = c2
                    osrc[m] = r1
                    odst[m] = r2
                    opos[m] = i - a0
                    opos2[m] = j - b0
                    odcost[m] = delta
                    odexc[m] = (exc1_after - exc1_before) + (exc2_after - exc2_before)
                    m += 1
    return m
