import { describe, expect, it } from "vitest";

import { LineBuffer, encodeResponse, parseRequest } from "../src/protocol";
import { foldQubo, quboEnergy } from "../src/qubo";

describe("LineBuffer", () => {
  it("reassembles lines split across chunks", () => {
    const buf = new LineBuffer();
    expect(buf.push('{"a"')).toEqual([]);
    expect(buf.push(': 1}\n{"b": 2}\n{"c"')).toEqual(['{"a": 1}', '{"b": 2}']);
    expect(buf.push(": 3}")).toEqual([]);
    expect(buf.flush()).toBe('{"c": 3}');
    expect(buf.flush()).toBe(null);
  });
});

describe("parseRequest", () => {
  const quboDoc = { num_vars: 2, offset: 0.5, terms: [[0, 0, -1], [0, 1, 2.5]] };

  it("accepts a well-formed request", () => {
    const r = parseRequest(JSON.stringify({ id: "q1", qubo: quboDoc, num_reads: 10 }));
    expect(r.ok).toBe(true);
    if (r.ok) {
      expect(r.request.id).toBe("q1");
      expect(r.request.numReads).toBe(10);
      expect(r.request.qubo.terms).toEqual([[0, 0, -1], [0, 1, 2.5]]);
    }
  });

  it("leaves numReads null when the request omits it", () => {
    const r = parseRequest(JSON.stringify({ id: 4, qubo: quboDoc }));
    expect(r.ok && r.request.numReads === null).toBe(true);
  });

  it("answers unparseable lines with id null", () => {
    const r = parseRequest("{nope");
    expect(r.ok).toBe(false);
    if (!r.ok) {
      expect(r.id).toBe(null);
      expect(r.error).toContain("malformed JSON");
    }
  });

  it("rejects non-object documents with id null", () => {
    for (const line of ["[1,2]", '"hi"', "42", "null"]) {
      const r = parseRequest(line);
      expect(r.ok).toBe(false);
      if (!r.ok) expect(r.id).toBe(null);
    }
  });

  it("requires an id", () => {
    const r = parseRequest(JSON.stringify({ qubo: quboDoc }));
    expect(!r.ok && r.error === "request missing id").toBe(true);
  });

  it("echoes the id on qubo shape problems", () => {
    const cases: [unknown, string][] = [
      [{ id: "a" }, "missing qubo"],
      [{ id: "b", qubo: { offset: 0, terms: [] } }, "num_vars"],
      [{ id: "c", qubo: { num_vars: 0, terms: [] } }, "num_vars"],
      [{ id: "d", qubo: { num_vars: 2, offset: "x", terms: [] } }, "offset"],
      [{ id: "e", qubo: { num_vars: 2, offset: 0, terms: [[0, 5, 1]] } }, "out of range"],
      [{ id: "f", qubo: { num_vars: 2, offset: 0, terms: [[0, 1]] } }, "triple"],
      [{ id: "g", qubo: { num_vars: 2, offset: 0, terms: [[0, 1, null]] } }, "finite"],
    ];
    for (const [doc, fragment] of cases) {
      const r = parseRequest(JSON.stringify(doc));
      expect(r.ok).toBe(false);
      if (!r.ok) {
        expect(r.id).toBe((doc as { id: unknown }).id);
        expect(r.error).toContain(fragment);
      }
    }
  });

  it("rejects bad num_reads values", () => {
    for (const bad of [0, -5, 2.5, "many"]) {
      const r = parseRequest(JSON.stringify({ id: "x", qubo: quboDoc, num_reads: bad }));
      expect(!r.ok && r.error.includes("num_reads")).toBe(true);
    }
  });
});

describe("foldQubo", () => {
  it("merges transposed and repeated keys", () => {
    const q = foldQubo({
      num_vars: 3,
      offset: 1,
      terms: [[0, 1, 2], [1, 0, 3], [2, 2, -1], [2, 2, -1], [1, 2, 0]],
    });
    expect(q.terms).toEqual([[0, 1, 5], [2, 2, -2]]);
    expect(q.adj[0 * 3 + 1]).toBe(5);
    expect(q.adj[1 * 3 + 0]).toBe(5);
    expect(q.linear[2]).toBe(-2);
    expect(q.maxAbs).toBe(5);
  });
});

describe("quboEnergy", () => {
  it("matches hand-computed values", () => {
    const q = foldQubo({
      num_vars: 2,
      offset: 0.5,
      terms: [[0, 0, -1], [1, 1, -1], [0, 1, 2]],
    });
    expect(quboEnergy(q, [0, 0])).toBe(0.5);
    expect(quboEnergy(q, [1, 0])).toBe(-0.5);
    expect(quboEnergy(q, [0, 1])).toBe(-0.5);
    expect(quboEnergy(q, [1, 1])).toBe(0.5);
  });
});

describe("encodeResponse", () => {
  it("terminates every response with one newline", () => {
    const line = encodeResponse({ id: "q9", samples: [] });
    expect(line.endsWith("\n")).toBe(true);
    expect(line.indexOf("\n")).toBe(line.length - 1);
  });
});
