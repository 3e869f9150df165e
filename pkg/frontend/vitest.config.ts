import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 30000,
    // the e2e file spawns its own backend; keep files sequential so
    // only one server runs at a time
    fileParallelism: false,
  },
});
