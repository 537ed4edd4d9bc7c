/**
 * Sampling backends behind one submit() face.
 *
 * local-fallback anneals in process and needs nothing from the outside
 * world.  cloud posts the QUBO to an HTTP endpoint with a bearer token and
 * translates the reply.  Backend failures are thrown; the server turns
 * them into per-request protocol error objects and keeps running.
 */

import { SampleRecord } from "./protocol";
import { DenseQubo, collectSamples, quboEnergy } from "./qubo";
import { SplitMix64, anneal, resolveSchedule, seedFromId } from "./anneal";

export interface Backend {
  readonly name: string;
  submit(qubo: DenseQubo, numReads: number, requestId: unknown): Promise<SampleRecord[]>;
}

export class LocalFallbackBackend implements Backend {
  readonly name = "local-fallback";

  async submit(qubo: DenseQubo, numReads: number, requestId: unknown): Promise<SampleRecord[]> {
    const rng = new SplitMix64(seedFromId(requestId));
    const schedule = resolveSchedule(qubo, numReads);
    return collectSamples(qubo, anneal(qubo, schedule, rng));
  }
}

export interface CloudOptions {
  endpoint: string;
  token: string;
  timeoutMs: number;
}

export class CloudBackend implements Backend {
  readonly name = "cloud";

  constructor(private readonly options: CloudOptions) {}

  async submit(qubo: DenseQubo, numReads: number, _requestId: unknown): Promise<SampleRecord[]> {
    const body = {
      qubo: { num_vars: qubo.numVars, offset: qubo.offset, terms: qubo.terms },
      num_reads: numReads,
    };
    let response: Response;
    try {
      response = await fetch(this.options.endpoint, {
        method: "POST",
        headers: {
          "content-type": "application/json",
          authorization: `Bearer ${this.options.token}`,
        },
        body: JSON.stringify(body),
        signal: AbortSignal.timeout(this.options.timeoutMs),
      });
    } catch (err) {
      const cause = (err as { cause?: { message?: string } }).cause;
      const detail = cause?.message ?? (err as Error).message;
      throw new Error(`cloud request to ${this.options.endpoint} failed: ${detail}`);
    }
    if (!response.ok) {
      throw new Error(`cloud sampler returned HTTP ${response.status}`);
    }
    let doc: unknown;
    try {
      doc = await response.json();
    } catch {
      throw new Error("cloud sampler returned a non-JSON body");
    }
    return translateCloudSamples(doc, qubo);
  }
}

/**
 * Shape-check a cloud reply and rebuild it as verified records.
 *
 * Device energies are discarded in favour of exact local recomputation so
 * downstream verification never depends on device rounding.
 */
export function translateCloudSamples(doc: unknown, qubo: DenseQubo): SampleRecord[] {
  const raw = (doc as { samples?: unknown })?.samples;
  if (!Array.isArray(raw) || raw.length === 0) {
    throw new Error("cloud reply carries no samples array");
  }
  const records: SampleRecord[] = [];
  for (let k = 0; k < raw.length; k++) {
    const s = raw[k] as { bits?: unknown; count?: unknown };
    const bits = s?.bits;
    if (!Array.isArray(bits) || bits.length !== qubo.numVars) {
      throw new Error(`cloud sample ${k}: expected ${qubo.numVars} bits`);
    }
    if (bits.some((b) => b !== 0 && b !== 1)) {
      throw new Error(`cloud sample ${k}: non-binary bits`);
    }
    const count = s.count === undefined ? 1 : s.count;
    if (typeof count !== "number" || !Number.isInteger(count) || count < 1) {
      throw new Error(`cloud sample ${k}: bad count ${JSON.stringify(count)}`);
    }
    const ints = bits.map((b) => b as number);
    records.push({ bits: ints, energy: quboEnergy(qubo, ints), count });
  }
  records.sort((a, b) => a.energy - b.energy);
  return records;
}
