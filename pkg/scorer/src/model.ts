/**
 * Window scorer training: a small feed-forward net over hashed
 * span/candidate conjunction features, added to the fixed surface prior.
 *
 * Initialization is chosen so the untrained model ranks windows exactly
 * like the surface prior: feature embeddings start at zero, so the learned
 * branch contributes the same constant to every candidate in a window and
 * cancels under argmax/softmax. The hidden bias starts positive so relu
 * units are active and gradients reach the embeddings from step one.
 *
 * Each batch packs its candidates into a dense multi-hot feature matrix,
 * so pooling is a single matrix product. The CPU backend multiplies
 * matrices quickly but its segment reductions are quadratic, which rules
 * out the usual gather/scatter embedding formulation here.
 */

import * as tf from '@tensorflow/tfjs';
import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import { featurize, PAD_TOKEN } from './features.js';
import { CHECKPOINT_FORMAT, type ModelConfig, chooseIndex } from './serving.js';
import type { Shard } from './shards.js';

/** Deterministic 32-bit PRNG so runs are reproducible across machines. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(rng: () => number): number {
  const u1 = Math.max(rng(), 1e-12);
  const u2 = rng();
  return Math.sqrt(-2 * Math.log(u1)) * Math.cos(2 * Math.PI * u2);
}

function seededShuffle<T>(items: T[], rng: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

const MASK = -1e9;

interface BatchTensors {
  /** multi-hot feature weights per candidate slot, [numSlots, hashDim] */
  bags: tf.Tensor2D;
  priors: tf.Tensor2D;
  padMask: tf.Tensor2D;
  gold: tf.Tensor1D;
  batch: number;
  width: number;
}

export class WindowScorer {
  readonly config: ModelConfig;
  private readonly emb: tf.Variable;
  private readonly w1: tf.Variable;
  private readonly b1: tf.Variable;
  private readonly w2: tf.Variable;
  private readonly b2: tf.Variable;
  private readonly priorW: tf.Variable;
  private readonly optimizer: tf.Optimizer;
  private readonly rng: () => number;

  constructor(config: ModelConfig) {
    this.config = config;
    this.rng = mulberry32(config.seed);
    const hidden = config.embedDim;
    this.emb = tf.variable(tf.zeros([config.hashDim, config.embedDim]));
    const w1Data = Float32Array.from(
      { length: config.embedDim * hidden },
      () => 0.2 * gaussian(this.rng)
    );
    this.w1 = tf.variable(tf.tensor2d(w1Data, [config.embedDim, hidden]));
    this.b1 = tf.variable(tf.fill([hidden], 0.1));
    const w2Data = Float32Array.from({ length: hidden }, () => 0.2 * gaussian(this.rng));
    this.w2 = tf.variable(tf.tensor2d(w2Data, [hidden, 1]));
    this.b2 = tf.variable(tf.scalar(0));
    this.priorW = tf.variable(tf.scalar(config.priorWeight));
    this.optimizer = tf.train.adam(config.learningRate);
  }

  /** Pack a batch of shards into the dense tensors the net consumes. */
  private pack(batch: Shard[]): BatchTensors {
    const { hashDim } = this.config;
    const width = Math.max(...batch.map((s) => s.window.length));
    const numSlots = batch.length * width;
    const bags = new Float32Array(numSlots * hashDim);
    const priors = new Float32Array(numSlots);
    const padMask = new Float32Array(numSlots);
    const gold: number[] = [];
    batch.forEach((shard, b) => {
      gold.push(shard.gold_index);
      for (let c = 0; c < width; c++) {
        const slot = b * width + c;
        const cand = c < shard.window.length ? shard.window[c] : PAD_TOKEN;
        if (cand === PAD_TOKEN) {
          padMask[slot] = MASK;
          continue;
        }
        const feats = featurize(shard.span_text, cand, shard.task, hashDim);
        priors[slot] = feats.prior;
        for (let j = 0; j < feats.indices.length; j++) {
          bags[slot * hashDim + feats.indices[j]] += feats.weights[j];
        }
      }
    });
    return {
      bags: tf.tensor2d(bags, [numSlots, hashDim]),
      priors: tf.tensor2d(priors, [batch.length, width]),
      padMask: tf.tensor2d(padMask, [batch.length, width]),
      gold: tf.tensor1d(gold, 'int32'),
      batch: batch.length,
      width,
    };
  }

  /** Masked scores [batch, width]; pads sit at a large negative constant. */
  private scoresFor(t: BatchTensors): tf.Tensor2D {
    const pooled = tf.matMul(t.bags, this.emb as tf.Tensor2D);
    const h = tf.relu(tf.add(tf.matMul(pooled, this.w1 as tf.Tensor2D), this.b1));
    const learned = tf
      .add(tf.matMul(h, this.w2 as tf.Tensor2D), this.b2)
      .reshape([t.batch, t.width]);
    const scores = tf.add(tf.mul(this.priorW, t.priors), learned);
    return tf.add(scores, t.padMask) as tf.Tensor2D;
  }

  private lossTensor(t: BatchTensors): tf.Scalar {
    const scores = this.scoresFor(t);
    const labels = tf.oneHot(t.gold, t.width);
    const ce = tf.losses.softmaxCrossEntropy(labels, scores) as tf.Scalar;
    if (this.config.weightDecay === 0) return ce;
    // Rows never touched by a gradient keep an exactly-zero decay gradient
    // too, so the table stays sparse and the checkpoint small.
    const reg = tf.addN([
      tf.sum(tf.square(this.w1)),
      tf.sum(tf.square(this.w2)),
      tf.sum(tf.square(this.emb)),
    ]);
    return tf.add(ce, tf.mul(this.config.weightDecay, reg)) as tf.Scalar;
  }

  lossOn(batch: Shard[]): number {
    return tf.tidy(() => this.lossTensor(this.pack(batch)).dataSync()[0]);
  }

  private trainStep(batch: Shard[]): number {
    const cost = this.optimizer.minimize(
      () => tf.tidy(() => this.lossTensor(this.pack(batch))),
      true,
      [this.emb, this.w1, this.b1, this.w2, this.b2, this.priorW] as tf.Variable[]
    );
    const value = cost ? cost.dataSync()[0] : NaN;
    cost?.dispose();
    return value;
  }

  /** One pass over the data in a freshly shuffled order; mean batch loss. */
  trainEpoch(shards: Shard[]): number {
    const order = seededShuffle(shards, this.rng);
    let total = 0;
    let steps = 0;
    for (let start = 0; start < order.length; start += this.config.batchSize) {
      total += this.trainStep(order.slice(start, start + this.config.batchSize));
      steps++;
    }
    return total / Math.max(steps, 1);
  }

  /** Fraction of windows whose top-scored candidate is the gold one. */
  evaluate(shards: Shard[]): number {
    let hits = 0;
    for (let start = 0; start < shards.length; start += this.config.batchSize) {
      const batch = shards.slice(start, start + this.config.batchSize);
      const scores = tf.tidy(
        () => this.scoresFor(this.pack(batch)).arraySync() as number[][]
      );
      batch.forEach((shard, b) => {
        if (chooseIndex(scores[b]) === shard.gold_index) hits++;
      });
    }
    return hits / shards.length;
  }

  saveTo(dir: string): void {
    mkdirSync(dir, { recursive: true });
    const embData = this.emb.dataSync();
    const { hashDim, embedDim } = this.config;
    const embRows: Record<string, number[]> = {};
    for (let r = 0; r < hashDim; r++) {
      const row = Array.from(embData.subarray(r * embedDim, (r + 1) * embedDim));
      if (row.some((v) => v !== 0)) embRows[String(r)] = row;
    }
    const checkpoint = {
      format: CHECKPOINT_FORMAT,
      version: 1,
      config: this.config,
      weights: {
        embRows,
        w1: this.w1.arraySync(),
        b1: this.b1.arraySync(),
        w2: (this.w2.arraySync() as number[][]).map((row) => row[0]),
        b2: this.b2.dataSync()[0],
        priorW: this.priorW.dataSync()[0],
      },
    };
    writeFileSync(join(dir, 'model.json'), JSON.stringify(checkpoint));
  }
}
