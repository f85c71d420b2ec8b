import { defineConfig } from "vite";

export default defineConfig({
  server: {
    proxy: {
      // forward API calls to the local campaign service during development
      "^/(status|points|suggestions|measurements|override|step|report|embedding|log)$":
        "http://127.0.0.1:8711",
    },
  },
  test: {
    environment: "jsdom",
  },
});
