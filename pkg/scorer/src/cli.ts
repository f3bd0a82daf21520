#!/usr/bin/env node
/**
 * Command line for the learned scorer: `train` fits a model on a shard
 * file, `serve` answers the scoring wire protocol from a checkpoint.
 */

// In stdio serve mode stdout carries protocol lines and nothing else, so
// route console.log (used by some dependencies for banners) to stderr
// before any of them load.
console.log = (...args: unknown[]) => {
  console.error(...args);
};

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName('ginsign-scorer')
    .command(
      'train',
      'fit a window scorer on a training shard file',
      (cmd) =>
        cmd
          .option('data', { type: 'string', demandOption: true, describe: 'shard JSONL file' })
          .option('config', { type: 'string', demandOption: true, describe: 'hyperparameter JSON file' })
          .option('out', { type: 'string', demandOption: true, describe: 'output directory' }),
      async (argv) => {
        const { runTrain } = await import('./train.js');
        runTrain({ data: argv.data, config: argv.config, out: argv.out });
      }
    )
    .command(
      'serve',
      'answer scoring requests from a trained model',
      (cmd) =>
        cmd
          .option('model', { type: 'string', demandOption: true, describe: 'trained model directory' })
          .option('http', { type: 'string', describe: 'listen on this port instead of stdio, e.g. :8091' }),
      async (argv) => {
        const { runServe } = await import('./serve.js');
        runServe({ model: argv.model, http: argv.http });
      }
    )
    .demandCommand(1)
    .strict()
    .help()
    .parseAsync();
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : String(err));
  process.exit(1);
});
