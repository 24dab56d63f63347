import { defineConfig } from "vitest/config";

export default defineConfig({
  build: {
    outDir: "dist",
    sourcemap: true,
  },
  server: {
    proxy: {
      // dev server forwards API traffic to a locally running service
      "/api": "http://127.0.0.1:8666",
      "/healthz": "http://127.0.0.1:8666",
    },
  },
  test: {
    environment: "jsdom",
  },
});
