/**
 * Protocol server: reads request lines, answers each with exactly one
 * response line, in order.  One request is in flight at a time; lines that
 * arrive while a request is being served wait in a queue.
 *
 * Responses go to the transport the request came from; status and startup
 * diagnostics go to stderr so stdout stays protocol-clean.
 */

import * as net from "node:net";
import { Writable } from "node:stream";

import { LineBuffer, encodeResponse, parseRequest } from "./protocol";
import { foldQubo } from "./qubo";
import { Backend, CloudBackend, LocalFallbackBackend } from "./backend";

export type ListenSpec = { kind: "stdio" } | { kind: "tcp"; port: number };

export interface BridgeConfig {
  listen: ListenSpec;
  backend: "local-fallback" | "cloud";
  /** Default reads for requests that omit num_reads. */
  numReads: number;
  timeoutSec: number;
  /** Name of the environment variable holding the cloud API token. */
  tokenEnv: string;
  /** Cloud submit URL; unused by local-fallback. */
  endpoint: string | null;
}

export const DEFAULT_CONFIG: BridgeConfig = {
  listen: { kind: "stdio" },
  backend: "local-fallback",
  numReads: 1000,
  timeoutSec: 120,
  tokenEnv: "QBRIDGE_API_TOKEN",
  endpoint: null,
};

/** Thrown for configuration problems the operator must fix before serving. */
export class StartupError extends Error {}

export function makeBackend(config: BridgeConfig, env: NodeJS.ProcessEnv): Backend {
  if (!(config.numReads >= 1)) {
    throw new StartupError(`num_reads must be positive, got ${config.numReads}`);
  }
  if (!(config.timeoutSec > 0)) {
    throw new StartupError(`timeout must be positive, got ${config.timeoutSec}`);
  }
  if (config.backend === "local-fallback") {
    return new LocalFallbackBackend();
  }
  const token = env[config.tokenEnv];
  if (token === undefined || token === "") {
    throw new StartupError(
      `cloud backend needs an API token: set the ${config.tokenEnv} environment variable`,
    );
  }
  if (config.endpoint === null) {
    throw new StartupError("cloud backend needs --endpoint URL");
  }
  return new CloudBackend({
    endpoint: config.endpoint,
    token,
    timeoutMs: config.timeoutSec * 1000,
  });
}

/**
 * Serve one request line; always returns a response line.
 *
 * Parse or validation failures echo the request id (null when the line was
 * unparseable); backend failures become error objects so one bad request
 * never takes the process down.
 */
export async function handleLine(
  line: string,
  backend: Backend,
  config: BridgeConfig,
): Promise<string> {
  const parsed = parseRequest(line);
  if (!parsed.ok) {
    return encodeResponse({ id: parsed.id, error: parsed.error });
  }
  const { id, qubo, numReads } = parsed.request;
  try {
    const samples = await backend.submit(foldQubo(qubo), numReads ?? config.numReads, id);
    return encodeResponse({ id, samples });
  } catch (err) {
    return encodeResponse({ id, error: `${backend.name} backend failure: ${(err as Error).message}` });
  }
}

/** Sequential pump: queued lines are answered one at a time, in order. */
class RequestPump {
  private readonly queue: string[] = [];
  private draining = false;
  private ended = false;
  private onIdle: (() => void) | null = null;

  constructor(
    private readonly backend: Backend,
    private readonly config: BridgeConfig,
    private readonly out: Writable,
  ) {}

  feed(lines: string[]): void {
    for (const line of lines) {
      if (line.trim().length > 0) this.queue.push(line);
    }
    void this.drain();
  }

  /** Resolves once every queued line has been answered after end(). */
  end(): Promise<void> {
    this.ended = true;
    return new Promise((resolve) => {
      if (!this.draining && this.queue.length === 0) {
        resolve();
      } else {
        this.onIdle = resolve;
      }
    });
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    while (this.queue.length > 0) {
      const line = this.queue.shift()!;
      const response = await handleLine(line, this.backend, this.config);
      if (!this.out.writableEnded) this.out.write(response);
    }
    this.draining = false;
    if (this.ended && this.onIdle !== null) {
      const resolve = this.onIdle;
      this.onIdle = null;
      resolve();
    }
  }
}

/** Serve over stdin/stdout until EOF; resolves when the last line is answered. */
export async function serveStdio(config: BridgeConfig, backend: Backend): Promise<void> {
  const pump = new RequestPump(backend, config, process.stdout);
  const buffer = new LineBuffer();
  await new Promise<void>((resolve, reject) => {
    process.stdin.on("data", (chunk) => pump.feed(buffer.push(chunk)));
    process.stdin.on("error", reject);
    process.stdin.on("end", () => {
      const tail = buffer.flush();
      if (tail !== null) pump.feed([tail]);
      void pump.end().then(resolve);
    });
  });
}

/**
 * Serve over TCP; resolves with the listening server once bound.
 *
 * Each connection gets its own pump, so requests on one socket are handled
 * sequentially while the socket stays open.
 */
export function serveTcp(config: BridgeConfig, backend: Backend, port: number): Promise<net.Server> {
  const server = net.createServer((socket) => {
    const pump = new RequestPump(backend, config, socket);
    const buffer = new LineBuffer();
    socket.on("data", (chunk) => pump.feed(buffer.push(chunk)));
    socket.on("error", () => socket.destroy());
    socket.on("end", () => {
      const tail = buffer.flush();
      if (tail !== null) pump.feed([tail]);
      void pump.end().then(() => socket.end());
    });
  });
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, () => resolve(server));
  });
}
