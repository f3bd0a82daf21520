/**
 * Checkpoint format and plain-array inference.
 *
 * Serving deliberately avoids the tensor runtime: the checkpoint holds
 * only the sparse nonzero embedding rows plus the small dense head, so a
 * few array loops reproduce the training-time forward pass exactly.
 */

import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { z } from 'zod';
import { featurize, PAD_TOKEN } from './features.js';

export const configSchema = z.object({
  learningRate: z.number().positive(),
  epochs: z.number().int().positive(),
  batchSize: z.number().int().positive(),
  weightDecay: z.number().nonnegative(),
  m: z.number().int().positive(),
  hashDim: z.number().int().positive(),
  embedDim: z.number().int().positive(),
  priorWeight: z.number(),
  seed: z.number().int(),
});

export type ModelConfig = z.infer<typeof configSchema>;

export function loadConfig(path: string): ModelConfig {
  return configSchema.parse(JSON.parse(readFileSync(path, 'utf8')));
}

export const CHECKPOINT_FORMAT = 'ginsign-window-scorer';

export const checkpointSchema = z.object({
  format: z.literal(CHECKPOINT_FORMAT),
  version: z.literal(1),
  config: configSchema,
  weights: z.object({
    embRows: z.record(z.string(), z.array(z.number())),
    w1: z.array(z.array(z.number())),
    b1: z.array(z.number()),
    w2: z.array(z.number()),
    b2: z.number(),
    priorW: z.number(),
  }),
});

export type Checkpoint = z.infer<typeof checkpointSchema>;

/** Lowest-index argmax; pads (scored -Infinity) are never chosen. */
export function chooseIndex(scores: number[]): number {
  let best = 0;
  let bestScore = -Infinity;
  for (let i = 0; i < scores.length; i++) {
    if (scores[i] > bestScore) {
      bestScore = scores[i];
      best = i;
    }
  }
  return best;
}

export class ServingScorer {
  private readonly hashDim: number;
  private readonly embedDim: number;
  private readonly embRows: Map<number, number[]>;
  private readonly w1: number[][];
  private readonly b1: number[];
  private readonly w2: number[];
  private readonly b2: number;
  private readonly priorW: number;

  constructor(checkpoint: Checkpoint) {
    this.hashDim = checkpoint.config.hashDim;
    this.embedDim = checkpoint.config.embedDim;
    this.embRows = new Map(
      Object.entries(checkpoint.weights.embRows).map(([k, v]) => [Number(k), v])
    );
    this.w1 = checkpoint.weights.w1;
    this.b1 = checkpoint.weights.b1;
    this.w2 = checkpoint.weights.w2;
    this.b2 = checkpoint.weights.b2;
    this.priorW = checkpoint.weights.priorW;
  }

  scoreOne(task: string, spanText: string, candidate: string): number {
    if (candidate === PAD_TOKEN) return -Infinity;
    const feats = featurize(spanText, candidate, task, this.hashDim);
    const pooled = new Float64Array(this.embedDim);
    for (let j = 0; j < feats.indices.length; j++) {
      const row = this.embRows.get(feats.indices[j]);
      if (!row) continue;
      const w = feats.weights[j];
      for (let d = 0; d < this.embedDim; d++) pooled[d] += w * row[d];
    }
    let learned = this.b2;
    for (let k = 0; k < this.b1.length; k++) {
      let pre = this.b1[k];
      for (let d = 0; d < this.embedDim; d++) pre += pooled[d] * this.w1[d][k];
      if (pre > 0) learned += pre * this.w2[k];
    }
    return this.priorW * feats.prior + learned;
  }

  scoreWindow(task: string, spanText: string, candidates: string[]): number[] {
    return candidates.map((cand) => this.scoreOne(task, spanText, cand));
  }
}

export function loadServing(modelDir: string): ServingScorer {
  const raw = JSON.parse(readFileSync(join(modelDir, 'model.json'), 'utf8'));
  return new ServingScorer(checkpointSchema.parse(raw));
}
