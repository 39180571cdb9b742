import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { loadDataset, readLabels, seededShuffle } from "../src/dataset.js";
import { buildModel, defaultMeta, loadModel, predictPx, saveModel } from "../src/model.js";
import { train } from "../src/train.js";
import { writeSyntheticDataset } from "./helpers.js";

let root: string;

beforeAll(async () => {
  await tf.setBackend("cpu");
  await tf.ready();
  root = fs.mkdtempSync(path.join(os.tmpdir(), "frontend-train-"));
});

afterAll(() => {
  fs.rmSync(root, { recursive: true, force: true });
});

describe("dataset loading", () => {
  it("reads labels and preprocesses images", () => {
    const dir = path.join(root, "ds-load");
    writeSyntheticDataset(dir, { count: 6, seed: 1 });
    const records = readLabels(dir);
    expect(records).toHaveLength(6);
    const { inputs, targets } = loadDataset(dir);
    expect(inputs[0]).toHaveLength(40 * 40);
    expect(Math.abs(targets[0][0])).toBeLessThanOrEqual(1);
  });

  it("rejects empty directories", () => {
    expect(() => readLabels(path.join(root, "nope"))).toThrow(/labels/);
  });

  it("seeded shuffle is reproducible", () => {
    expect(seededShuffle(20, 7)).toEqual(seededShuffle(20, 7));
    expect(seededShuffle(20, 7)).not.toEqual(seededShuffle(20, 8));
  });
});

describe("training", () => {
  it("loss decreases on a small dataset", async () => {
    const dir = path.join(root, "ds-train");
    writeSyntheticDataset(dir, { count: 48, seed: 2 });
    const log = await train({
      dataset: dir,
      out: path.join(root, "model-smoke"),
      epochs: 2,
      lr: 1e-3,
      batch: 16,
      split: 0.2,
      seed: 3,
    });
    expect(log).toHaveLength(2);
    expect(log[1].trainMsePx).toBeLessThan(log[0].trainMsePx);
    expect(fs.existsSync(path.join(root, "model-smoke", "training_log.json"))).toBe(true);
  }, 120_000);

  it("fits a constant-label degenerate dataset", async () => {
    const dir = path.join(root, "ds-const");
    writeSyntheticDataset(dir, { count: 40, seed: 4, constantLabel: [12, -20] });
    const log = await train({
      dataset: dir,
      out: path.join(root, "model-const"),
      epochs: 30,
      lr: 2e-3,
      batch: 16,
      split: 0.2,
      seed: 5,
    });
    const last = log[log.length - 1];
    expect(last.valMsePx).toBeLessThan(20.0); // converges toward the constant
    expect(last.valMsePx).toBeLessThan(log[0].valMsePx / 5);
  }, 240_000);

  it("rejects a bad split", async () => {
    await expect(
      train({ dataset: root, out: root, epochs: 1, lr: 1e-3, batch: 8, split: 1.5, seed: 0 }),
    ).rejects.toThrow(/split/);
  });
});

describe("model persistence", () => {
  it("save/load round-trips predictions exactly", async () => {
    const model = buildModel(11);
    const dir = path.join(root, "model-roundtrip");
    await saveModel(model, dir, defaultMeta(11));
    const { model: loaded, meta } = await loadModel(dir);
    expect(meta.seed).toBe(11);
    const input = new Float32Array(40 * 40).map(() => 0.5);
    const [a] = predictPx(model, [input]);
    const [b] = predictPx(loaded, [input]);
    expect(b[0]).toBeCloseTo(a[0], 6);
    expect(b[1]).toBeCloseTo(a[1], 6);
  });
});
