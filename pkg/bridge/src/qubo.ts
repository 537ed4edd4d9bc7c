/**
 * Dense working form of a wire QUBO.
 *
 * Terms arrive as [i, j, value] triples in arbitrary order, possibly with
 * transposed or repeated keys.  Folding accumulates them into an upper
 * triangle (first occurrence fixes the summation order), splits out the
 * diagonal as linear coefficients, and mirrors couplings into a full
 * adjacency matrix so the annealer can update local fields in one pass.
 */

import { SampleRecord, WireQubo, WireTerm } from "./protocol";

export interface DenseQubo {
  numVars: number;
  offset: number;
  /** Diagonal coefficients (x*x = x on binaries). */
  linear: Float64Array;
  /** Symmetric numVars x numVars couplings, zero diagonal, row-major. */
  adj: Float64Array;
  /** Folded terms in first-occurrence order, for energy evaluation. */
  terms: WireTerm[];
  /** Largest absolute folded coefficient; seeds the annealing schedule. */
  maxAbs: number;
}

export function foldQubo(wire: WireQubo): DenseQubo {
  const nv = wire.num_vars;
  const folded = new Map<number, WireTerm>();
  for (const [ti, tj, v] of wire.terms) {
    if (v === 0) continue;
    const i = Math.min(ti, tj);
    const j = Math.max(ti, tj);
    const key = i * nv + j;
    const prev = folded.get(key);
    if (prev === undefined) {
      folded.set(key, [i, j, v]);
    } else {
      prev[2] += v;
    }
  }

  const linear = new Float64Array(nv);
  const adj = new Float64Array(nv * nv);
  const terms: WireTerm[] = [];
  let maxAbs = 0;
  for (const term of folded.values()) {
    const [i, j, c] = term;
    terms.push(term);
    if (Math.abs(c) > maxAbs) maxAbs = Math.abs(c);
    if (i === j) {
      linear[i] += c;
    } else {
      adj[i * nv + j] += c;
      adj[j * nv + i] += c;
    }
  }
  return { numVars: nv, offset: wire.offset, linear, adj, terms, maxAbs };
}

/** offset + linear + quadratic energy of one bit assignment. */
export function quboEnergy(q: DenseQubo, bits: Uint8Array | number[]): number {
  let e = q.offset;
  for (const [i, j, c] of q.terms) {
    if (bits[i] && (i === j || bits[j])) e += c;
  }
  return e;
}

/**
 * Group raw per-read states by bitstring and emit verified records.
 *
 * Energies are recomputed from the folded terms rather than trusted from
 * whatever produced the states, so every record is self-consistent.  Sorted
 * ascending by energy; ties keep first-seen order (Array.sort is stable).
 */
export function collectSamples(q: DenseQubo, reads: Uint8Array[]): SampleRecord[] {
  const seen = new Map<string, { bits: number[]; count: number }>();
  for (const row of reads) {
    const key = Buffer.from(row).toString("latin1");
    const entry = seen.get(key);
    if (entry === undefined) {
      seen.set(key, { bits: Array.from(row), count: 1 });
    } else {
      entry.count += 1;
    }
  }
  const records: SampleRecord[] = [];
  for (const { bits, count } of seen.values()) {
    records.push({ bits, energy: quboEnergy(q, bits), count });
  }
  records.sort((a, b) => a.energy - b.energy);
  return records;
}
