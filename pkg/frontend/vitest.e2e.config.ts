import { defineConfig } from "vitest/config";

// The live-server suite spawns one python process per file; keep files
// sequential so two servers never fight over the single sandbox core.
export default defineConfig({
  test: {
    include: ["e2e/**/*.test.ts"],
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
