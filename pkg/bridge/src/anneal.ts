/**
 * Single-bit-flip Metropolis annealing with geometric cooling.
 *
 * Matches the reference annealer the clients of this protocol calibrate
 * against: splitmix64 random stream, initial temperature at the largest
 * absolute coefficient, final temperature three decades lower, ten sweeps
 * per variable, and the exp() call skipped whenever delta > 40 T.  All
 * reads of one request share a single sequential RNG stream.
 */

import { DenseQubo } from "./qubo";

const MASK64 = (1n << 64n) - 1n;
const INV_2_53 = 1.0 / 9007199254740992.0;

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  next(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return (z ^ (z >> 31n)) & MASK64;
  }

  /** Fair coin from the top bit. */
  topBit(): number {
    return Number(this.next() >> 63n);
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  uniform(): number {
    return Number(this.next() >> 11n) * INV_2_53;
  }
}

/**
 * Deterministic 64-bit seed from a request id (FNV-1a over its text).
 *
 * The wire carries no seed, so the bridge derives one from the only
 * per-request datum the client controls.  Clients that number requests
 * sequentially therefore get reproducible sessions for free.
 */
export function seedFromId(id: unknown): bigint {
  const text = typeof id === "string" ? id : JSON.stringify(id) ?? "null";
  const bytes = Buffer.from(text, "utf8");
  let h = 0xcbf29ce484222325n;
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}

export interface Schedule {
  numReads: number;
  sweeps: number;
  tInitial: number;
  cooling: number;
}

export function resolveSchedule(q: DenseQubo, numReads: number): Schedule {
  const sweeps = 10 * q.numVars;
  const t0 = q.maxAbs > 0 ? q.maxAbs : 1.0;
  const t1 = 1e-3 * t0;
  const cooling = sweeps > 1 ? Math.pow(t1 / t0, 1 / (sweeps - 1)) : 0.5;
  return { numReads, sweeps, tInitial: t0, cooling };
}

/** Run the schedule; returns one final state per read. */
export function anneal(q: DenseQubo, schedule: Schedule, rng: SplitMix64): Uint8Array[] {
  const nv = q.numVars;
  const { linear, adj } = q;
  const reads: Uint8Array[] = [];
  const x = new Uint8Array(nv);
  const field = new Float64Array(nv);

  for (let r = 0; r < schedule.numReads; r++) {
    for (let k = 0; k < nv; k++) x[k] = rng.topBit();
    field.set(linear);
    for (let k = 0; k < nv; k++) {
      if (x[k]) {
        const row = k * nv;
        for (let j = 0; j < nv; j++) field[j] += adj[row + j];
      }
    }
    let t = schedule.tInitial;
    for (let s = 0; s < schedule.sweeps; s++) {
      for (let k = 0; k < nv; k++) {
        const delta = x[k] ? -field[k] : field[k];
        let flip: boolean;
        if (delta <= 0) {
          flip = true;
        } else if (delta > 40 * t) {
          flip = false;
        } else {
          flip = rng.uniform() < Math.exp(-delta / t);
        }
        if (flip) {
          x[k] ^= 1;
          const row = k * nv;
          if (x[k]) {
            for (let j = 0; j < nv; j++) field[j] += adj[row + j];
          } else {
            for (let j = 0; j < nv; j++) field[j] -= adj[row + j];
          }
        }
      }
      t *= schedule.cooling;
    }
    reads.push(x.slice());
  }
  return reads;
}
