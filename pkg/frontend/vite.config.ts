import { defineConfig } from 'vitest/config';

export default defineConfig({
  server: {
    // the UI consumes the service API exclusively; proxy it in dev
    proxy: { '/api': 'http://127.0.0.1:8000' },
  },
  test: {
    environment: 'node',
    include: ['test/**/*.test.ts'],
  },
});
