import * as net from "node:net";
import { describe, expect, it } from "vitest";

import { CloudBackend, LocalFallbackBackend } from "../src/backend";
import { BridgeConfig, DEFAULT_CONFIG, StartupError, handleLine, makeBackend, serveTcp } from "../src/server";
import { parseListen } from "../src/cli";

const LOCAL = new LocalFallbackBackend();

function config(overrides: Partial<BridgeConfig> = {}): BridgeConfig {
  return { ...DEFAULT_CONFIG, ...overrides };
}

function request(id: unknown, numReads?: number): string {
  return JSON.stringify({
    id,
    qubo: { num_vars: 1, offset: 0, terms: [[0, 0, -1]] },
    ...(numReads === undefined ? {} : { num_reads: numReads }),
  });
}

describe("makeBackend", () => {
  it("builds the local fallback without any environment", () => {
    expect(makeBackend(config(), {}).name).toBe("local-fallback");
  });

  it("enforces positive num_reads and timeout", () => {
    expect(() => makeBackend(config({ numReads: 0 }), {})).toThrow(StartupError);
    expect(() => makeBackend(config({ timeoutSec: 0 }), {})).toThrow(StartupError);
    expect(() => makeBackend(config({ timeoutSec: -1 }), {})).toThrow(StartupError);
  });

  it("refuses cloud mode without the token, naming the variable", () => {
    const c = config({ backend: "cloud", tokenEnv: "MY_SAMPLER_TOKEN", endpoint: "http://x/submit" });
    expect(() => makeBackend(c, {})).toThrow(/set the MY_SAMPLER_TOKEN environment variable/);
    expect(() => makeBackend(c, { MY_SAMPLER_TOKEN: "" })).toThrow(StartupError);
  });

  it("refuses cloud mode without an endpoint", () => {
    const c = config({ backend: "cloud", tokenEnv: "T" });
    expect(() => makeBackend(c, { T: "tok" })).toThrow(/--endpoint/);
  });

  it("builds the cloud backend when both are present", () => {
    const c = config({ backend: "cloud", tokenEnv: "T", endpoint: "http://x/submit" });
    expect(makeBackend(c, { T: "tok" }).name).toBe("cloud");
  });
});

describe("handleLine", () => {
  it("echoes the request id with sorted samples", async () => {
    const line = await handleLine(request("q1", 5), LOCAL, config());
    const doc = JSON.parse(line);
    expect(doc.id).toBe("q1");
    expect(doc.samples[0].bits).toEqual([1]);
    expect(doc.samples[0].energy).toBe(-1);
  });

  it("answers malformed lines with id null", async () => {
    const doc = JSON.parse(await handleLine("garbage{", LOCAL, config()));
    expect(doc.id).toBe(null);
    expect(typeof doc.error).toBe("string");
  });

  it("echoes the id on shape errors", async () => {
    const doc = JSON.parse(await handleLine('{"id": 7, "qubo": 3}', LOCAL, config()));
    expect(doc.id).toBe(7);
    expect(doc.error).toContain("qubo");
  });

  it("falls back to the configured num_reads", async () => {
    const doc = JSON.parse(await handleLine(request("q2"), LOCAL, config({ numReads: 7 })));
    const total = doc.samples.reduce((acc: number, s: { count: number }) => acc + s.count, 0);
    expect(total).toBe(7);
  });

  it("turns backend failures into error objects and keeps serving", async () => {
    // port 9 on loopback: nothing listens there, connections fail fast
    const cloud = new CloudBackend({ endpoint: "http://127.0.0.1:9/submit", token: "t", timeoutMs: 2000 });
    const first = JSON.parse(await handleLine(request("c1", 3), cloud, config()));
    expect(first.id).toBe("c1");
    expect(first.error).toContain("cloud backend failure");
    const second = JSON.parse(await handleLine(request("c2", 3), cloud, config()));
    expect(second.id).toBe("c2");
    expect(second.error).toContain("cloud backend failure");
  });
});

describe("serveTcp", () => {
  it("answers each request line in order over a socket", async () => {
    const server = await serveTcp(config(), LOCAL, 0);
    const port = (server.address() as net.AddressInfo).port;
    try {
      const lines = await new Promise<string[]>((resolve, reject) => {
        const socket = net.connect(port, "127.0.0.1");
        let data = "";
        socket.on("data", (d) => {
          data += d.toString();
          if (data.split("\n").filter((l) => l.length > 0).length >= 3) {
            socket.destroy();
            resolve(data.split("\n").filter((l) => l.length > 0));
          }
        });
        socket.on("error", reject);
        socket.on("connect", () => {
          socket.write(request("t1", 2) + "\n");
          socket.write("broken json\n");
          socket.write(request("t3", 2) + "\n");
        });
        setTimeout(() => reject(new Error(`timeout; got ${JSON.stringify(data)}`)), 20_000);
      });
      const docs = lines.map((l) => JSON.parse(l));
      expect(docs.map((d) => d.id)).toEqual(["t1", null, "t3"]);
      expect(docs[0].samples[0].bits).toEqual([1]);
      expect(docs[1].error).toContain("malformed JSON");
      expect(docs[2].samples[0].energy).toBe(-1);
    } finally {
      server.close();
    }
  });
});

describe("parseListen", () => {
  it("accepts stdio and tcp forms", () => {
    expect(parseListen("stdio")).toEqual({ kind: "stdio" });
    expect(parseListen("tcp:8471")).toEqual({ kind: "tcp", port: 8471 });
  });

  it("rejects bad ports and unknown modes", () => {
    expect(() => parseListen("tcp:banana")).toThrow(/bad TCP port/);
    expect(() => parseListen("tcp:70000")).toThrow(/bad TCP port/);
    expect(() => parseListen("udp:1")).toThrow(/stdio or tcp:PORT/);
  });
});
