/**
 * Wire types and parsing for the newline-delimited JSON sampler protocol.
 *
 * One request per line, one response per line, always in request order.
 * A request carries an id (echoed verbatim), a QUBO document, and an
 * optional num_reads.  Lines that fail to parse are answered with id null
 * because there is nothing trustworthy to echo.
 */

export type WireTerm = [number, number, number];

export interface WireQubo {
  num_vars: number;
  offset: number;
  terms: WireTerm[];
}

export interface SampleRecord {
  bits: number[];
  energy: number;
  count: number;
}

export interface SamplerRequest {
  id: unknown;
  qubo: WireQubo;
  /** null means the request omitted num_reads: use the configured default. */
  numReads: number | null;
}

export interface OkResponse {
  id: unknown;
  samples: SampleRecord[];
}

export interface ErrorResponse {
  id: unknown;
  error: string;
}

export type WireResponse = OkResponse | ErrorResponse;

export type ParseResult =
  | { ok: true; request: SamplerRequest }
  | { ok: false; id: unknown; error: string };

// Guards against hostile or corrupted sizes, not a tuning knob.
const MAX_VARS = 4096;
const MAX_READS = 1_000_000;

export function splitLines(buffer: string): { lines: string[]; rest: string } {
  const lines: string[] = [];
  let rest = buffer;
  while (true) {
    const nl = rest.indexOf("\n");
    if (nl < 0) break;
    lines.push(rest.slice(0, nl));
    rest = rest.slice(nl + 1);
  }
  return { lines, rest };
}

/** Stream chunk accumulator that hands back complete lines. */
export class LineBuffer {
  private rest = "";

  push(chunk: Buffer | string): string[] {
    const { lines, rest } = splitLines(this.rest + chunk.toString());
    this.rest = rest;
    return lines;
  }

  /** Whatever trails the final newline at EOF, or null if nothing does. */
  flush(): string | null {
    const tail = this.rest;
    this.rest = "";
    return tail.length > 0 ? tail : null;
  }
}

function isPlainObject(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function fail(id: unknown, error: string): ParseResult {
  return { ok: false, id, error };
}

/** Validate one request line.  Never throws; shape problems become errors. */
export function parseRequest(line: string): ParseResult {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch (err) {
    return fail(null, `malformed JSON: ${(err as Error).message}`);
  }
  if (!isPlainObject(doc)) {
    return fail(null, "request must be a JSON object");
  }
  if (doc.id === undefined) {
    return fail(null, "request missing id");
  }
  const id = doc.id;

  const quboRaw = doc.qubo;
  if (!isPlainObject(quboRaw)) {
    return fail(id, "request missing qubo object");
  }
  const numVars = quboRaw.num_vars;
  if (typeof numVars !== "number" || !Number.isInteger(numVars) || numVars < 1) {
    return fail(id, `qubo.num_vars must be a positive integer, got ${JSON.stringify(numVars)}`);
  }
  if (numVars > MAX_VARS) {
    return fail(id, `qubo.num_vars ${numVars} exceeds limit ${MAX_VARS}`);
  }
  const offsetRaw = quboRaw.offset === undefined ? 0 : quboRaw.offset;
  if (typeof offsetRaw !== "number" || !Number.isFinite(offsetRaw)) {
    return fail(id, "qubo.offset must be a finite number");
  }
  const termsRaw = quboRaw.terms === undefined ? [] : quboRaw.terms;
  if (!Array.isArray(termsRaw)) {
    return fail(id, "qubo.terms must be an array of [i, j, value] triples");
  }
  const terms: WireTerm[] = [];
  for (let k = 0; k < termsRaw.length; k++) {
    const t = termsRaw[k];
    if (!Array.isArray(t) || t.length !== 3) {
      return fail(id, `qubo.terms[${k}] must be an [i, j, value] triple`);
    }
    const [i, j, v] = t as unknown[];
    if (
      typeof i !== "number" || !Number.isInteger(i) || i < 0 || i >= numVars ||
      typeof j !== "number" || !Number.isInteger(j) || j < 0 || j >= numVars
    ) {
      return fail(id, `qubo.terms[${k}] indices out of range for ${numVars} variables`);
    }
    if (typeof v !== "number" || !Number.isFinite(v)) {
      return fail(id, `qubo.terms[${k}] value must be a finite number`);
    }
    terms.push([i, j, v]);
  }

  let numReads: number | null = null;
  if (doc.num_reads !== undefined) {
    const n = doc.num_reads;
    if (typeof n !== "number" || !Number.isInteger(n) || n < 1) {
      return fail(id, `num_reads must be a positive integer, got ${JSON.stringify(n)}`);
    }
    if (n > MAX_READS) {
      return fail(id, `num_reads ${n} exceeds limit ${MAX_READS}`);
    }
    numReads = n;
  }

  return {
    ok: true,
    request: { id, qubo: { num_vars: numVars, offset: offsetRaw, terms }, numReads },
  };
}

export function encodeResponse(response: WireResponse): string {
  return `${JSON.stringify(response)}\n`;
}
