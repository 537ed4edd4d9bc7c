#!/usr/bin/env node
/**
 * quantum-bridge command line.
 *
 * Flags map one to one onto BridgeConfig; parsing problems exit 2 with
 * usage, startup problems (bad invariants, missing cloud credentials)
 * exit 1 with a message.  A running bridge never exits over a bad
 * request; those get per-request error objects instead.
 */

import { parseArgs } from "node:util";

import { BridgeConfig, DEFAULT_CONFIG, ListenSpec, StartupError, makeBackend, serveStdio, serveTcp } from "./server";

const USAGE = `usage: quantum-bridge [--listen stdio|tcp:PORT] [--backend local-fallback|cloud]
                      [--num-reads N] [--timeout SECONDS]
                      [--token-env NAME] [--endpoint URL]

Newline-delimited JSON QUBO sampler.  Requests arrive one per line as
{"id": ..., "qubo": {"num_vars": N, "offset": F, "terms": [[i, j, v], ...]},
 "num_reads": R} and each gets exactly one response line: {"id": ...,
"samples": [{"bits": [...], "energy": E, "count": C}, ...]} sorted by
energy, or {"id": ..., "error": "..."} on failure.

defaults: --listen stdio, --backend local-fallback, --num-reads 1000,
          --timeout 120, --token-env QBRIDGE_API_TOKEN
`;

export function parseListen(text: string): ListenSpec {
  if (text === "stdio") return { kind: "stdio" };
  if (text.startsWith("tcp:")) {
    const port = Number(text.slice(4));
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      throw new Error(`bad TCP port in ${JSON.stringify(text)}`);
    }
    return { kind: "tcp", port };
  }
  throw new Error(`--listen wants stdio or tcp:PORT, got ${JSON.stringify(text)}`);
}

export function parseCliConfig(argv: string[]): BridgeConfig {
  const { values } = parseArgs({
    args: argv,
    options: {
      listen: { type: "string", default: "stdio" },
      backend: { type: "string", default: DEFAULT_CONFIG.backend },
      "num-reads": { type: "string", default: String(DEFAULT_CONFIG.numReads) },
      timeout: { type: "string", default: String(DEFAULT_CONFIG.timeoutSec) },
      "token-env": { type: "string", default: DEFAULT_CONFIG.tokenEnv },
      endpoint: { type: "string" },
      help: { type: "boolean", default: false },
    },
    allowPositionals: false,
  });
  if (values.help) {
    throw new HelpRequested();
  }
  const backend = values.backend!;
  if (backend !== "local-fallback" && backend !== "cloud") {
    throw new Error(`--backend wants local-fallback or cloud, got ${JSON.stringify(backend)}`);
  }
  const numReads = Number(values["num-reads"]);
  if (!Number.isInteger(numReads)) {
    throw new Error(`--num-reads wants an integer, got ${JSON.stringify(values["num-reads"])}`);
  }
  const timeoutSec = Number(values.timeout);
  if (!Number.isFinite(timeoutSec)) {
    throw new Error(`--timeout wants a number, got ${JSON.stringify(values.timeout)}`);
  }
  return {
    listen: parseListen(values.listen!),
    backend,
    numReads,
    timeoutSec,
    tokenEnv: values["token-env"]!,
    endpoint: values.endpoint ?? null,
  };
}

class HelpRequested extends Error {}

export async function main(argv: string[]): Promise<number> {
  let config: BridgeConfig;
  try {
    config = parseCliConfig(argv);
  } catch (err) {
    if (err instanceof HelpRequested) {
      process.stdout.write(USAGE);
      return 0;
    }
    process.stderr.write(`quantum-bridge: ${(err as Error).message}\n${USAGE}`);
    return 2;
  }

  let backend;
  try {
    backend = makeBackend(config, process.env);
  } catch (err) {
    if (err instanceof StartupError) {
      process.stderr.write(`quantum-bridge: ${err.message}\n`);
      return 1;
    }
    throw err;
  }

  if (config.listen.kind === "stdio") {
    process.stderr.write(
      `quantum-bridge: ${backend.name} backend over stdio (num_reads ${config.numReads}, timeout ${config.timeoutSec}s)\n`,
    );
    await serveStdio(config, backend);
    return 0;
  }

  const server = await serveTcp(config, backend, config.listen.port);
  const addr = server.address();
  const port = typeof addr === "object" && addr !== null ? addr.port : config.listen.port;
  process.stderr.write(
    `quantum-bridge: ${backend.name} backend on tcp port ${port} (num_reads ${config.numReads}, timeout ${config.timeoutSec}s)\n`,
  );
  await new Promise<void>((resolve) => {
    process.once("SIGINT", resolve);
    process.once("SIGTERM", resolve);
  });
  server.close();
  return 0;
}

if (require.main === module) {
  // exitCode instead of process.exit: lets queued stdout finish flushing,
  // so the final response line is never truncated on a pipe
  main(process.argv.slice(2)).then(
    (code) => {
      process.exitCode = code;
    },
    (err) => {
      process.stderr.write(`quantum-bridge: unexpected failure: ${err?.stack ?? err}\n`);
      process.exitCode = 1;
    },
  );
}
