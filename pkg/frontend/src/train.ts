import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset, seededShuffle } from "./dataset.js";
import { buildModel, defaultMeta, saveModel } from "./model.js";
import { INPUT_SIZE, LABEL_SCALE } from "./preprocess.js";

export interface TrainConfig {
  dataset: string;
  out: string;
  epochs: number;
  lr: number;
  batch: number;
  split: number;
  seed: number;
}

export interface EpochStats {
  epoch: number;
  trainMsePx: number;
  valMsePx: number;
}

export async function train(config: TrainConfig): Promise<EpochStats[]> {
  if (config.split <= 0 || config.split >= 1) {
    throw new Error(`validation split must be in (0,1), got ${config.split}`);
  }
  const { inputs, targets } = loadDataset(config.dataset);
  const order = seededShuffle(inputs.length, config.seed);
  const valCount = Math.max(1, Math.round(inputs.length * config.split));
  const trainIdx = order.slice(0, inputs.length - valCount);
  const valIdx = order.slice(inputs.length - valCount);

  const toTensors = (idx: number[]) => {
    const xs = new Float32Array(idx.length * INPUT_SIZE * INPUT_SIZE);
    const ys = new Float32Array(idx.length * 2);
    idx.forEach((sample, i) => {
      xs.set(inputs[sample], i * INPUT_SIZE * INPUT_SIZE);
      ys.set(targets[sample], i * 2);
    });
    return {
      xs: tf.tensor4d(xs, [idx.length, INPUT_SIZE, INPUT_SIZE, 1]),
      ys: tf.tensor2d(ys, [idx.length, 2]),
    };
  };

  const trainSet = toTensors(trainIdx);
  const valSet = toTensors(valIdx);
  const model = buildModel(config.seed);
  model.compile({ optimizer: tf.train.adam(config.lr), loss: "meanSquaredError" });

  const log: EpochStats[] = [];
  const pxScale = LABEL_SCALE * LABEL_SCALE;
  const history = await model.fit(trainSet.xs, trainSet.ys, {
    epochs: config.epochs,
    batchSize: config.batch,
    shuffle: false, // order fixed by the seeded shuffle above
    validationData: [valSet.xs, valSet.ys],
    verbose: 0,
    callbacks: {
      onEpochEnd: async (epoch, logs) => {
        const stats = {
          epoch: epoch + 1,
          trainMsePx: (logs?.loss ?? NaN) * pxScale,
          valMsePx: (logs?.val_loss ?? NaN) * pxScale,
        };
        log.push(stats);
        process.stderr.write(
          `epoch ${stats.epoch}/${config.epochs}: train MSE ${stats.trainMsePx.toFixed(2)} px^2, ` +
            `val MSE ${stats.valMsePx.toFixed(2)} px^2\n`,
        );
        if (stats.epoch % 5 === 0 && stats.epoch < config.epochs) {
          await saveModel(model, config.out, defaultMeta(config.seed));
        }
      },
    },
  });
  void history;

  await saveModel(model, config.out, defaultMeta(config.seed));
  fs.writeFileSync(
    path.join(config.out, "training_log.json"),
    JSON.stringify(
      {
        dataset: config.dataset,
        epochs: config.epochs,
        lr: config.lr,
        batch: config.batch,
        split: config.split,
        seed: config.seed,
        trainSamples: trainIdx.length,
        valSamples: valIdx.length,
        perEpoch: log,
      },
      null,
      2,
    ) + "\n",
  );
  trainSet.xs.dispose();
  trainSet.ys.dispose();
  valSet.xs.dispose();
  valSet.ys.dispose();
  return log;
}

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .option("dataset", { type: "string", demandOption: true })
    .option("out", { type: "string", demandOption: true })
    .option("epochs", { type: "number", default: 40 })
    .option("lr", { type: "number", default: 1e-5 })
    .option("batch", { type: "number", default: 32 })
    .option("split", { type: "number", default: 0.2 })
    .option("seed", { type: "number", default: 0 })
    .strict()
    .parse();

  await tf.setBackend("cpu");
  await tf.ready();
  const log = await train({
    dataset: argv.dataset,
    out: argv.out,
    epochs: argv.epochs,
    lr: argv.lr,
    batch: argv.batch,
    split: argv.split,
    seed: argv.seed,
  });
  const last = log[log.length - 1];
  process.stderr.write(
    `done: final val MSE ${last.valMsePx.toFixed(2)} px^2 -> ${argv.out}\n`,
  );
}

const isCliEntry = process.argv[1] !== undefined && import.meta.url.endsWith(path.basename(process.argv[1]));
if (isCliEntry) {
  main().catch((err) => {
    process.stderr.write(`training failed: ${err}\n`);
    process.exit(1);
  });
}
