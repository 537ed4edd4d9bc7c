# cython: language_level=3
"""Compiled kernels: SA annealer and neighborhood scan.

Arithmetic-identical to fallback.py (same splitmix64 stream, same operation
order); only speed differs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, INFINITY


cdef inline unsigned long long _mix(unsigned long long *state) noexcept nogil:
    state[0] = state[0] + 0x9E3779B97F4A7C15ULL
    cdef unsigned long long z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def anneal(const double[::1] linear, const int[::1] nbr_ptr, const int[::1] nbr_idx,
           const double[::1] nbr_val, double offset, int num_reads, int sweeps,
           double t0, double cooling, unsigned long long seed,
           unsigned char[:, ::1] out_bits, double[::1] out_energy):
    """Single-bit-flip Metropolis annealing, geometric cooling."""
    cdef int nv = linear.shape[0]
    cdef unsigned long long state = seed
    cdef double[::1] field = np.empty(nv, dtype=np.float64)
    cdef unsigned char[::1] x = np.empty(nv, dtype=np.uint8)
    cdef int r, s, k, p
    cdef double t, e, delta, u
    cdef bint flip

    for r in range(num_reads):
        for k in range(nv):
            x[k] = <unsigned char>(_mix(&state) >> 63)
        for k in range(nv):
            field[k] = linear[k]
        for k in range(nv):
            if x[k]:
                for p in range(nbr_ptr[k], nbr_ptr[k + 1]):
                    field[nbr_idx[p]] += nbr_val[p]
        e = offset
        for k in range(nv):
            if x[k]:
                e += linear[k] + 0.5 * (field[k] - linear[k])
        t = t0
        for s in range(sweeps):
            for k in range(nv):
                delta = -field[k] if x[k] else field[k]
                if delta <= 0.0:
                    flip = True
                elif delta > 40.0 * t:
                    flip = False
                else:
                    u = (_mix(&state) >> 11) * (1.0 / 9007199254740992.0)
                    flip = u < exp(-delta / t)
                if flip:
                    x[k] ^= 1
                    if x[k]:
                        for p in range(nbr_ptr[k], nbr_ptr[k + 1]):
                            field[nbr_idx[p]] += nbr_val[p]
                    else:
                        for p in range(nbr_ptr[k], nbr_ptr[k + 1]):
                            field[nbr_idx[p]] -= nbr_val[p]
                    e += delta
            t *= cooling
        for k in range(nv):
            out_bits[r, k] = x[k]
        out_energy[r] = e


def scan_neighborhood(const double[:, ::1] dist, const double[::1] demand, double cap,
                      int[::1] cust, int[::1] rstart, double[::1] rload,
                      const unsigned char[:, ::1] close, bint allow_new,
                      signed char[::1] okind, int[::1] oc1, int[::1] oc2,
                      int[::1] osrc, int[::1] odst, int[::1] opos,
                      int[::1] opos2, double[::1] odcost, double[::1] odexc):
    """Enumerate relocate / intra-swap / inter-swap candidates in canonical order."""
    cdef int nr = rstart.shape[0] - 1
    cdef int m = 0
    cdef int src, dst, r, r1, r2, ip, jp, i, j, p
    cdef int s0, s1, d0, d1, a0, a1, b0, b1, length, ld, bestp
    cdef int c, c1, c2, prev, nxt_, prev_i, next_i, prev_j, next_j, a, b
    cdef double rem, after, dexc_src, best, ins, delta, base_i
    cdef double exc_src_before, exc_dst_before, exc_dst_after
    cdef double exc1_before, exc2_before, exc1_after, exc2_after
    cdef bint elig

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
                best = INFINITY
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
