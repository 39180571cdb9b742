import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset } from "./dataset.js";
import { loadModel, predictPx } from "./model.js";

export interface OfflinePrediction {
  index: number;
  x: number;
  y: number;
  trueX: number;
  trueY: number;
}

/** Batch predictions over a dataset directory, same preprocessing as serve. */
export async function predictDataset(modelDir: string, datasetDir: string): Promise<OfflinePrediction[]> {
  const { model } = await loadModel(modelDir);
  const { inputs, records } = loadDataset(datasetDir);
  const out: OfflinePrediction[] = [];
  const batchSize = 256;
  for (let start = 0; start < inputs.length; start += batchSize) {
    const batch = inputs.slice(start, start + batchSize);
    const predictions = predictPx(model, batch);
    predictions.forEach(([x, y], i) => {
      const record = records[start + i];
      out.push({ index: record.index, x, y, trueX: record.x, trueY: record.y });
    });
  }
  return out;
}

export function quadrantAccuracy(predictions: OfflinePrediction[]): number {
  let match = 0;
  for (const p of predictions) {
    const sameX = Math.sign(p.x) === Math.sign(p.trueX) && p.x !== 0;
    const sameY = Math.sign(p.y) === Math.sign(p.trueY) && p.y !== 0;
    if (sameX && sameY) match++;
  }
  return match / predictions.length;
}

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .option("model", { type: "string", demandOption: true })
    .option("dataset", { type: "string", demandOption: true })
    .option("out", { type: "string" })
    .strict()
    .parse();
  await tf.setBackend("cpu");
  await tf.ready();
  const predictions = await predictDataset(argv.model, argv.dataset);
  const accuracy = quadrantAccuracy(predictions);
  const summary = { n: predictions.length, rQuadrant: accuracy };
  if (argv.out) {
    fs.writeFileSync(argv.out, JSON.stringify({ ...summary, predictions }, null, 2) + "\n");
  }
  process.stdout.write(JSON.stringify(summary) + "\n");
}

const isCliEntry = process.argv[1] !== undefined && import.meta.url.endsWith(path.basename(process.argv[1]));
if (isCliEntry) {
  main().catch((err) => {
    process.stderr.write(`offline prediction failed: ${err}\n`);
    process.exit(1);
  });
}
