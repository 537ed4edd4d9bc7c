"""QUBO sampling backends: exact enumeration, simulated annealing, remote.

All backends return SampleSets sorted ascending by energy (ties first-seen)
with every energy re-verified by local recomputation.  sample_exact is the
ground-truth oracle for small problems; sample_sa is the desk-scale
stand-in for annealing hardware; sample_remote speaks a newline-delimited
JSON protocol to an out-of-process sampler over stdio or TCP.
"""

from __future__ import annotations

import json
import select
import shlex
import socket
import subprocess
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .qubo import Qubo, qubo_energy

EXACT_GUARD = 24
SWEEPS_FACTOR = 10  # default sweeps per read = SWEEPS_FACTOR * num_vars


class SamplerError(RuntimeError):
    """Raised for remote-backend transport, protocol, or validation failures."""


@dataclass(frozen=True)
class Sample:
    bits: tuple[int, ...]
    energy: float
    count: int = 1


class SampleSet:
    """Energy-sorted samples; iteration yields Samples, best first."""

    def __init__(self, samples: list[Sample]):
        self.samples = samples

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __eq__(self, other):
        return isinstance(other, SampleSet) and self.samples == other.samples


def best_sample(sample_set: SampleSet) -> tuple[tuple[int, ...], float]:
    """Lowest-energy sample (first element; ties already first-seen)."""
    if not sample_set.samples:
        raise ValueError("empty sample set")
    first = sample_set.samples[0]
    return first.bits, first.energy


@dataclass(frozen=True)
class AnnealSchedule:
    """Annealing parameters; None fields resolve per-QUBO at sample time.

    Defaults: sweeps = 10x num_vars, initial temperature = max absolute
    coefficient, final = 1e-3 x initial, geometric cooling between them.
    """

    num_reads: int = 1000
    sweeps: int | None = None
    t_initial: float | None = None
    t_final: float | None = None
    cooling: float | None = None
    seed: int = 0

    def resolve(self, qubo: Qubo) -> "AnnealSchedule":
        sweeps = self.sweeps if self.sweeps is not None else SWEEPS_FACTOR * qubo.num_vars
        t0 = self.t_initial
        if t0 is None:
            t0 = max((abs(c) for c in qubo.coefficients.values()), default=0.0)
            if t0 <= 0.0:
                t0 = 1.0
        t1 = self.t_final if self.t_final is not None else 1e-3 * t0
        cooling = self.cooling
        if cooling is None:
            cooling = (t1 / t0) ** (1.0 / (sweeps - 1)) if sweeps > 1 else 0.5
        if not (0.0 < t1 < t0):
            raise ValueError(f"need 0 < t_final < t_initial, got {t1} / {t0}")
        if not (0.0 < cooling < 1.0):
            raise ValueError(f"need 0 < cooling < 1, got {cooling}")
        if self.num_reads < 1 or sweeps < 1:
            raise ValueError("num_reads and sweeps must be positive")
        return replace(self, sweeps=sweeps, t_initial=t0, t_final=t1, cooling=cooling)


def _csr_adjacency(qubo: Qubo) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Linear array plus symmetric CSR neighbor lists for the annealer."""
    linear, rows, cols, vals = qubo.to_arrays()
    nv = qubo.num_vars
    counts = np.zeros(nv + 1, dtype=np.int32)
    for i, j in zip(rows, cols):
        counts[i + 1] += 1
        counts[j + 1] += 1
    ptr = np.cumsum(counts, dtype=np.int32)
    idx = np.zeros(max(1, ptr[-1]), dtype=np.int32)
    val = np.zeros(max(1, ptr[-1]), dtype=np.float64)
    fill = ptr[:-1].copy()
    for i, j, c in zip(rows, cols, vals):
        idx[fill[i]] = j
        val[fill[i]] = c
        fill[i] += 1
        idx[fill[j]] = i
        val[fill[j]] = c
        fill[j] += 1
    return linear, ptr, idx, val


def _collect(qubo: Qubo, bit_rows, first_seen_order=True) -> SampleSet:
    """Aggregate raw per-read bitstrings into a verified, sorted SampleSet."""
    seen: dict[bytes, list] = {}
    order = 0
    for row in bit_rows:
        key = bytes(row)
        entry = seen.get(key)
        if entry is None:
            seen[key] = [order, 1, row]
            order += 1
        else:
            entry[1] += 1
    uniques = sorted(seen.values(), key=lambda e: e[0])
    samples = [
        Sample(tuple(int(b) for b in row), qubo_energy(qubo, row), count)
        for _, count, row in uniques
    ]
    samples.sort(key=lambda s: s.energy)  # stable: ties keep first-seen order
    return SampleSet(samples)


def sample_exact(qubo: Qubo) -> SampleSet:
    """Enumerate every bitstring; keep the 100 lowest-energy states.

    Guarded at 24 variables.  Ties at the cutoff are kept in enumeration
    order (variable k is bit k of the config integer).
    """
    nv = qubo.num_vars
    if nv > EXACT_GUARD:
        raise ValueError(f"sample_exact limited to {EXACT_GUARD} variables, got {nv}")
    linear, rows, cols, vals = qubo.to_arrays()
    total = 1 << nv
    energies = np.empty(total, dtype=np.float64)
    chunk = 1 << 18
    shifts = np.arange(nv, dtype=np.uint32)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        configs = np.arange(start, stop, dtype=np.uint32)
        bits = ((configs[:, None] >> shifts) & 1).astype(np.float64)
        e = qubo.offset + bits @ linear
        for i, j, c in zip(rows, cols, vals):
            e += c * bits[:, i] * bits[:, j]
        energies[start:stop] = e

    keep = min(100, total)
    vstar = np.partition(energies, keep - 1)[keep - 1]
    below = np.flatnonzero(energies < vstar)
    at = np.flatnonzero(energies == vstar)[: keep - below.size]
    idx = np.sort(np.concatenate([below, at]))
    samples = []
    for cfg in idx:
        bits = [(int(cfg) >> k) & 1 for k in range(nv)]
        samples.append(Sample(tuple(bits), qubo_energy(qubo, bits), 1))
    samples.sort(key=lambda s: s.energy)  # stable: enumeration order on ties
    return SampleSet(samples)


def sample_sa(qubo: Qubo, schedule: AnnealSchedule | None = None) -> SampleSet:
    """num_reads independent annealing restarts; deterministic per seed."""
    schedule = (schedule or AnnealSchedule()).resolve(qubo)
    linear, ptr, idx, val = _csr_adjacency(qubo)
    out_bits = np.zeros((schedule.num_reads, qubo.num_vars), dtype=np.uint8)
    out_energy = np.zeros(schedule.num_reads, dtype=np.float64)
    _kernels.anneal(
        linear, ptr, idx, val, qubo.offset,
        schedule.num_reads, schedule.sweeps,
        schedule.t_initial, schedule.cooling,
        np.uint64(schedule.seed & ((1 << 64) - 1)),
        out_bits, out_energy,
    )
    return _collect(qubo, out_bits)


# --- remote backend ---------------------------------------------------------


class RemoteSampler:
    """Client for the newline-delimited JSON sampler protocol.

    Endpoints: "tcp:HOST:PORT" connects a socket; "cmd:COMMAND ..." spawns a
    subprocess and speaks over its stdio.  One request is in flight at a
    time; responses may still arrive out of order and are matched by id.
    """

    def __init__(self, endpoint: str, num_reads: int = 1000, timeout: float = 120.0):
        self.endpoint = endpoint
        self.num_reads = num_reads
        self.timeout = timeout
        self._counter = 0
        self._pending: dict[str, dict] = {}
        self._proc = None
        self._sock = None
        self._buf = b""
        try:
            if endpoint.startswith("tcp:"):
                _, host, port = endpoint.split(":", 2)
                self._sock = socket.create_connection((host, int(port)), timeout=timeout)
                self._sock.settimeout(timeout)
            elif endpoint.startswith("cmd:"):
                self._proc = subprocess.Popen(
                    shlex.split(endpoint[4:]),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                )
            else:
                raise SamplerError(f"unknown endpoint form {endpoint!r} (want tcp:... or cmd:...)")
        except (OSError, ValueError) as exc:
            raise SamplerError(f"cannot reach sampler at {endpoint!r}: {exc}") from None

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _send(self, line: bytes) -> None:
        try:
            if self._sock is not None:
                self._sock.sendall(line)
            else:
                self._proc.stdin.write(line)
                self._proc.stdin.flush()
        except (OSError, BrokenPipeError) as exc:
            raise SamplerError(f"transport failure sending request: {exc}") from None

    def _read_line(self) -> bytes:
        while b"\n" not in self._buf:
            if self._sock is not None:
                try:
                    data = self._sock.recv(65536)
                except socket.timeout:
                    raise SamplerError(f"timeout after {self.timeout}s waiting for response") from None
                except OSError as exc:
                    raise SamplerError(f"transport failure: {exc}") from None
            else:
                fd = self._proc.stdout
                ready, _, _ = select.select([fd], [], [], self.timeout)
                if not ready:
                    raise SamplerError(f"timeout after {self.timeout}s waiting for response")
                data = fd.read1(65536)
            if not data:
                raise SamplerError("connection closed by sampler")
            self._buf += data
        line, _, self._buf = self._buf.partition(b"\n")
        return line

    def _receive(self, want_id: str) -> dict:
        while True:
            if want_id in self._pending:
                return self._pending.pop(want_id)
            line = self._read_line()
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SamplerError(f"malformed response line: {exc}") from None
            rid = doc.get("id")
            if rid == want_id:
                return doc
            self._pending[str(rid)] = doc

    def sample(self, qubo: Qubo, seed: int | None = None) -> SampleSet:
        self._counter += 1
        rid = f"q{self._counter}"
        request = {
            "id": rid,
            "qubo": json.loads(qubo.to_json()),
            "num_reads": self.num_reads,
        }
        self._send((json.dumps(request) + "\n").encode())
        doc = self._receive(rid)
        if "error" in doc:
            raise SamplerError(f"sampler reported error: {doc['error']}")
        raw = doc.get("samples")
        if not isinstance(raw, list) or not raw:
            raise SamplerError("response carries no samples")
        samples = []
        for k, s in enumerate(raw):
            bits = s.get("bits")
            if not isinstance(bits, list) or len(bits) != qubo.num_vars:
                raise SamplerError(
                    f"sample {k}: expected {qubo.num_vars} bits, got {len(bits) if isinstance(bits, list) else bits!r}"
                )
            if any(b not in (0, 1) for b in bits):
                raise SamplerError(f"sample {k}: non-binary bits")
            local = qubo_energy(qubo, bits)
            stated = s.get("energy")
            if not isinstance(stated, (int, float)) or abs(local - stated) > 1e-6:
                raise SamplerError(
                    f"sample {k}: energy mismatch (stated {stated}, recomputed {local:.9g})"
                )
            count = s.get("count", 1)
            if not isinstance(count, int) or count < 1:
                raise SamplerError(f"sample {k}: bad count {count!r}")
            samples.append(Sample(tuple(int(b) for b in bits), local, count))
        samples.sort(key=lambda s: s.energy)  # stable: response order on ties
        return SampleSet(samples)


def sample_remote(qubo: Qubo, endpoint: str | RemoteSampler, num_reads: int = 1000) -> SampleSet:
    """One-shot remote sampling; accepts an endpoint string or open client."""
    if isinstance(endpoint, RemoteSampler):
        return endpoint.sample(qubo)
    with RemoteSampler(endpoint, num_reads=num_reads) as client:
        return client.sample(qubo)


# --- uniform backend objects for the search loop ----------------------------


class ExactSampler:
    """sample_exact behind the common sampler interface (seed ignored)."""

    def sample(self, qubo: Qubo, seed: int | None = None) -> SampleSet:
        return sample_exact(qubo)


class SASampler:
    """sample_sa behind the common interface; per-call seed override."""

    def __init__(self, schedule: AnnealSchedule | None = None):
        self.schedule = schedule or AnnealSchedule()

    def sample(self, qubo: Qubo, seed: int | None = None) -> SampleSet:
        sched = self.schedule if seed is None else replace(self.schedule, seed=seed)
        return sample_sa(qubo, sched)


def make_sampler(spec: str, num_reads: int = 1000, timeout: float = 120.0):
    """Build a sampler from a CLI-style string: exact | sa | remote:...."""
    if spec == "exact":
        return ExactSampler()
    if spec == "sa":
        return SASampler(AnnealSchedule(num_reads=num_reads))
    if spec.startswith("remote:"):
        return RemoteSampler(spec[len("remote:"):], num_reads=num_reads, timeout=timeout)
    raise ValueError(f"unknown sampler {spec!r} (want exact, sa, or remote:...)")
