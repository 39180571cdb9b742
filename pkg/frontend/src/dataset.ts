import * as fs from "node:fs";
import * as path from "node:path";

import { parsePgm } from "./pgm.js";
import { FULL_SIZE, LABEL_SCALE, preprocess } from "./preprocess.js";

export interface LabelRecord {
  index: number;
  image: string;
  x: number;
  y: number;
  darkness: number;
  diameter: number;
  background: string;
}

export interface LoadedDataset {
  inputs: Float32Array[]; // preprocessed, one per sample
  targets: Float32Array[]; // normalized (x, y)
  records: LabelRecord[];
}

export function readLabels(datasetDir: string): LabelRecord[] {
  const labelsPath = path.join(datasetDir, "labels.jsonl");
  if (!fs.existsSync(labelsPath)) {
    throw new Error(`${datasetDir}: no labels.jsonl (not a dataset directory?)`);
  }
  const records = fs
    .readFileSync(labelsPath, "utf-8")
    .split("\n")
    .filter((line) => line.trim().length > 0)
    .map((line) => JSON.parse(line) as LabelRecord);
  if (records.length === 0) {
    throw new Error(`${datasetDir}: empty dataset`);
  }
  return records;
}

export function loadDataset(datasetDir: string): LoadedDataset {
  const records = readLabels(datasetDir);
  const inputs: Float32Array[] = [];
  const targets: Float32Array[] = [];
  for (const record of records) {
    const image = parsePgm(fs.readFileSync(path.join(datasetDir, record.image)));
    if (image.width !== FULL_SIZE || image.height !== FULL_SIZE) {
      throw new Error(
        `${record.image}: expected ${FULL_SIZE}x${FULL_SIZE}, got ${image.width}x${image.height}`,
      );
    }
    inputs.push(preprocess(image.pixels, image.width, image.height));
    targets.push(new Float32Array([record.x / LABEL_SCALE, record.y / LABEL_SCALE]));
  }
  return { inputs, targets, records };
}

/** Deterministic shuffle (mulberry32) so training runs are reproducible. */
export function seededShuffle(count: number, seed: number): number[] {
  let state = seed >>> 0;
  const rand = () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const order = Array.from({ length: count }, (_, i) => i);
  for (let i = count - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  return order;
}
