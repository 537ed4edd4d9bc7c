import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { CLI_JS, REPO_ROOT, runProcess } from "./util";

const CMT1 = path.join(REPO_ROOT, "src", "qtabu", "data", "cmt01.vrp");
const BKS_CMT1 = 524.61;
// same qualifying band the solver's own benchmark studies use
const QUALIFY_PCT = 2.0;

describe("solver through the bridge", () => {
  it(
    "reaches the qualifying band on CMT 1 with the bridge as sampler",
    { timeout: 1_800_000 },
    async () => {
      expect(fs.existsSync(CLI_JS), "dist/cli.js missing: run npm run build").toBe(true);
      expect(fs.existsSync(CMT1), "solver package data missing").toBe(true);

      const outPath = path.join(os.tmpdir(), `bridge-cmt1-${process.pid}.json`);
      const attempts: string[] = [];
      let qualified = false;
      try {
        for (const seed of [1, 2, 3, 4, 5]) {
          const run = await runProcess(
            "python3",
            [
              "-m", "qtabu.cli", "solve",
              "--instance", CMT1,
              "--start", "cw",
              "--sampler", `remote:cmd:node ${CLI_JS}`,
              "--routing-delay", "250",
              "--seed", String(seed),
              "--num-reads", "200",
              "--time-limit", "300",
              "--out", outPath,
            ],
            null,
            480_000,
          );
          expect(run.code, `solver failed (seed ${seed}): ${run.stderr}`).toBe(0);
          const doc = JSON.parse(fs.readFileSync(outPath, "utf8"));
          const dev = (100 * (doc.cost - BKS_CMT1)) / BKS_CMT1;
          attempts.push(`seed ${seed}: cost ${doc.cost.toFixed(2)} (+${dev.toFixed(2)}%)`);
          expect(doc.feasible, `infeasible final solution (seed ${seed})`).toBe(true);
          if (dev <= QUALIFY_PCT) {
            qualified = true;
            break;
          }
        }
      } finally {
        fs.rmSync(outPath, { force: true });
      }
      expect(qualified, `no seed reached ${QUALIFY_PCT}%: ${attempts.join("; ")}`).toBe(true);
    },
  );
});
