import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, describe, expect, it } from 'vitest';
import { lexicalPrior } from '../src/features.js';
import { WindowScorer, mulberry32 } from '../src/model.js';
import { loadServing, type ModelConfig } from '../src/serving.js';
import type { Shard } from '../src/shards.js';
import { loadShards } from '../src/shards.js';

const HERE = dirname(fileURLToPath(import.meta.url));
const TOY_SHARDS = join(HERE, '..', 'fixtures', 'toy_shards.jsonl');

const tinyConfig: ModelConfig = {
  learningRate: 0.05,
  epochs: 5,
  batchSize: 4,
  weightDecay: 0.0,
  m: 4,
  hashDim: 512,
  embedDim: 8,
  priorWeight: 1.0,
  seed: 7,
};

function shard(span: string, window: string[], gold: number, task: 'predicate' | 'argument' = 'argument'): Shard {
  return {
    context_text: 'Eventually prop_1.',
    domain: 'unit',
    gold_index: gold,
    placeholder_id: 'prop_1',
    predicate_hint: task === 'argument' ? 'grab' : null,
    span_text: span,
    task,
    window,
  };
}

// Four synonym pairs with zero surface overlap: the prior alone cannot
// separate them, so any accuracy gain must come from learned features.
const PAIRS: [string, string][] = [
  ['couch', 'sofa'],
  ['telly', 'tv_monitor'],
  ['pooch', 'dog'],
  ['blade', 'knife'],
];
const LABELS = PAIRS.map(([, label]) => label).sort();
const SYNONYM_SHARDS: Shard[] = PAIRS.map(([mention, label]) =>
  shard(`bring the ${mention}`, [...LABELS], LABELS.indexOf(label))
);

describe('mulberry32', () => {
  it('is deterministic for a given seed', () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    expect([a(), a(), a()]).toEqual([b(), b(), b()]);
  });
});

describe('WindowScorer', () => {
  it('matches the surface prior argmax before any training', () => {
    const scorer = new WindowScorer(tinyConfig);
    const windows: Shard[] = [
      shard('grab the hammer', ['wrench', 'hammer', 'crate', '<pad>'], 1),
      shard('pick up the tarp', ['tarp', 'pallet', 'dolly', 'broom'], 0),
    ];
    // The learned branch starts as a per-window constant, so accuracy on
    // prior-separable windows is already perfect.
    expect(scorer.evaluate(windows)).toBe(1.0);
    expect(lexicalPrior('grab the hammer', 'hammer')).toBeGreaterThan(
      lexicalPrior('grab the hammer', 'wrench')
    );
  });

  it('learns synonym pairs the prior scores at chance', () => {
    const scorer = new WindowScorer(tinyConfig);
    const before = scorer.evaluate(SYNONYM_SHARDS);
    expect(before).toBeLessThan(1.0);
    let loss = Infinity;
    for (let e = 0; e < tinyConfig.epochs; e++) {
      loss = scorer.trainEpoch(SYNONYM_SHARDS);
    }
    expect(scorer.evaluate(SYNONYM_SHARDS)).toBe(1.0);
    expect(loss).toBeLessThan(scorer.lossOn(SYNONYM_SHARDS) + 5);
  });

  it('drops probe loss within one epoch', () => {
    const scorer = new WindowScorer(tinyConfig);
    const before = scorer.lossOn(SYNONYM_SHARDS);
    scorer.trainEpoch(SYNONYM_SHARDS);
    expect(scorer.lossOn(SYNONYM_SHARDS)).toBeLessThan(before);
  });
});

describe('checkpoint round trip', () => {
  const dir = mkdtempSync(join(tmpdir(), 'scorer-'));
  afterAll(() => rmSync(dir, { recursive: true, force: true }));

  it('serves the same argmax the trained model computed', () => {
    const scorer = new WindowScorer(tinyConfig);
    for (let e = 0; e < tinyConfig.epochs; e++) scorer.trainEpoch(SYNONYM_SHARDS);
    scorer.saveTo(dir);
    const served = loadServing(dir);
    for (const s of SYNONYM_SHARDS) {
      const scores = served.scoreWindow(s.task, s.span_text, s.window);
      const best = scores.indexOf(Math.max(...scores));
      expect(best).toBe(s.gold_index);
    }
    expect(served.scoreOne('argument', 'anything', '<pad>')).toBe(-Infinity);
  });
});

describe('shard loading', () => {
  it('reads the exported toy corpus', () => {
    const shards = loadShards(TOY_SHARDS);
    expect(shards.length).toBe(280);
    for (const s of shards) {
      expect(s.window.length).toBe(20);
      expect(s.window[s.gold_index]).not.toBe('<pad>');
    }
  });
});
