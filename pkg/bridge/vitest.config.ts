import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // single-core sandbox: parallel files just contend with each other
    fileParallelism: false,
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
