/**
 * Training entry point: fit a window scorer on a shard file and write the
 * checkpoint plus a metrics report into the output directory.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';
import { WindowScorer } from './model.js';
import { loadConfig } from './serving.js';
import { loadShards } from './shards.js';

export interface EpochMetrics {
  epoch: number;
  meanLoss: number;
  windowAccuracy: number;
}

export interface TrainMetrics {
  shards: number;
  epochs: EpochMetrics[];
  firstBatch: { before: number; afterEpoch1: number };
  seconds: number;
}

export function runTrain(opts: {
  data: string;
  config: string;
  out: string;
}): TrainMetrics {
  const started = Date.now();
  const config = loadConfig(opts.config);
  const shards = loadShards(opts.data);
  console.error(`loaded ${shards.length} shards from ${opts.data}`);
  const scorer = new WindowScorer(config);

  // Track loss on a fixed probe batch to show training actually moves it.
  const probe = shards.slice(0, config.batchSize);
  const before = scorer.lossOn(probe);
  console.error(`probe batch loss before training: ${before.toFixed(4)}`);

  const epochs: EpochMetrics[] = [];
  let afterEpoch1 = before;
  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const meanLoss = scorer.trainEpoch(shards);
    if (epoch === 1) afterEpoch1 = scorer.lossOn(probe);
    const windowAccuracy = scorer.evaluate(shards);
    epochs.push({ epoch, meanLoss, windowAccuracy });
    console.error(
      `epoch ${epoch}/${config.epochs}: mean loss ${meanLoss.toFixed(4)}, ` +
        `window accuracy ${windowAccuracy.toFixed(4)}`
    );
  }

  mkdirSync(opts.out, { recursive: true });
  scorer.saveTo(opts.out);
  const metrics: TrainMetrics = {
    shards: shards.length,
    epochs,
    firstBatch: { before, afterEpoch1 },
    seconds: (Date.now() - started) / 1000,
  };
  writeFileSync(join(opts.out, 'metrics.json'), JSON.stringify(metrics, null, 2) + '\n');
  console.error(`wrote model and metrics to ${opts.out}`);
  return metrics;
}
