/**
 * Serve a trained model over the scoring wire protocol.
 *
 * Default transport is NDJSON over stdio: one response line per request
 * line, diagnostics kept strictly on stderr. With --http the same
 * handler answers POST /score instead.
 */

import { createInterface } from 'node:readline';
import express from 'express';
import { handleLine, handleMessage } from './protocol.js';
import { loadServing } from './serving.js';

export function runServe(opts: { model: string; http?: string }): void {
  const model = loadServing(opts.model);
  if (opts.http !== undefined) {
    const port = Number.parseInt(opts.http.replace(/^.*:/, ''), 10);
    if (!Number.isInteger(port) || port <= 0) {
      throw new Error(`bad --http value: ${opts.http}`);
    }
    const app = express();
    app.use(express.json({ limit: '8mb' }));
    app.get('/health', (_req, res) => {
      res.json({ status: 'ok' });
    });
    app.post('/score', (req, res) => {
      const result = handleMessage(req.body, model);
      if (!result.ok) {
        res.status(400).json({ error: result.error, kind: 'ProtocolViolationError' });
        return;
      }
      res.json(result.body);
    });
    app.listen(port, () => {
      console.error(`scoring ${opts.model} on port ${port}`);
    });
    return;
  }

  const lines = createInterface({ input: process.stdin, terminal: false });
  lines.on('line', (line) => {
    if (!line.trim()) return;
    process.stdout.write(handleLine(line, model) + '\n');
  });
  console.error(`scoring ${opts.model} over stdio`);
}
