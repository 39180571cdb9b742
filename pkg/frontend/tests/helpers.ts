import * as fs from "node:fs";
import * as path from "node:path";

import { writePgm } from "../src/pgm.js";
import { FULL_SIZE } from "../src/preprocess.js";

export interface SyntheticSpec {
  count: number;
  seed: number;
  constantLabel?: [number, number];
}

/** Write a minimal dataset directory: plain background, one dark disc at the
 * labeled position in each half-view, labels.jsonl alongside. */
export function writeSyntheticDataset(dir: string, spec: SyntheticSpec): void {
  fs.mkdirSync(path.join(dir, "images"), { recursive: true });
  let state = spec.seed >>> 0;
  const rand = () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
  const lines: string[] = [];
  for (let i = 0; i < spec.count; i++) {
    const label = spec.constantLabel ?? [
      Math.floor(rand() * 100) - 50 || 5,
      Math.floor(rand() * 100) - 50 || 5,
    ];
    const pixels = new Uint8Array(FULL_SIZE * FULL_SIZE).fill(200);
    drawDisc(pixels, 40 + label[0], 80 - label[1], 9, 20);
    drawDisc(pixels, 120 - label[0], 80 - label[1], 9, 20);
    const name = `images/${String(i).padStart(6, "0")}.pgm`;
    fs.writeFileSync(
      path.join(dir, name),
      writePgm({ width: FULL_SIZE, height: FULL_SIZE, pixels }),
    );
    lines.push(
      JSON.stringify({
        index: i,
        image: name,
        x: label[0],
        y: label[1],
        darkness: 20,
        diameter: 18,
        background: "plain/000",
      }),
    );
  }
  fs.writeFileSync(path.join(dir, "labels.jsonl"), lines.join("\n") + "\n");
}

function drawDisc(pixels: Uint8Array, cx: number, cy: number, radius: number, value: number): void {
  for (let r = Math.max(0, Math.floor(cy - radius)); r <= Math.min(FULL_SIZE - 1, cy + radius); r++) {
    for (let c = Math.max(0, Math.floor(cx - radius)); c <= Math.min(FULL_SIZE - 1, cx + radius); c++) {
      const dx = c - cx;
      const dy = r - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        pixels[r * FULL_SIZE + c] = value;
      }
    }
  }
}
