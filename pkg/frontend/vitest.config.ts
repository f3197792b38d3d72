import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["./tests/serve.ts"],
    // the backing service holds mutable state (visibility, threshold), so
    // test files must not interleave
    fileParallelism: false,
    testTimeout: 30000,
    hookTimeout: 120000,
  },
});
