/**
 * Reader for training shards: one JSON object per line, each a single
 * scoring window with the gold candidate somewhere inside it.
 */

import { readFileSync } from 'node:fs';
import { z } from 'zod';

export const shardSchema = z.object({
  context_text: z.string(),
  domain: z.string(),
  gold_index: z.number().int().nonnegative(),
  placeholder_id: z.string(),
  predicate_hint: z.string().nullable(),
  span_text: z.string(),
  task: z.enum(['predicate', 'argument']),
  window: z.array(z.string()).min(1),
});

export type Shard = z.infer<typeof shardSchema>;

export function loadShards(path: string): Shard[] {
  const shards: Shard[] = [];
  const lines = readFileSync(path, 'utf8').split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let raw: unknown;
    try {
      raw = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: not valid JSON (${String(err)})`);
    }
    const parsed = shardSchema.safeParse(raw);
    if (!parsed.success) {
      throw new Error(`${path}:${i + 1}: ${parsed.error.issues[0].message}`);
    }
    const shard = parsed.data;
    if (shard.gold_index >= shard.window.length) {
      throw new Error(`${path}:${i + 1}: gold_index out of range`);
    }
    shards.push(shard);
  }
  if (shards.length === 0) {
    throw new Error(`${path}: no shards found`);
  }
  return shards;
}
