import * as fs from "node:fs";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";

import { INPUT_SIZE, LABEL_SCALE, POOL } from "./preprocess.js";

export interface ModelMeta {
  inputSize: number;
  pool: number;
  labelScale: number;
  seed: number;
}

/** Spatial-expectation readout: softmax each score map over its spatial
 * extent and return the expected (row, col) per map, normalized to [-1, 1].
 * Localization heads like this give position gradients through cheap
 * softmax/sum kernels instead of the slow dense-head conv backprop. */
export class SpatialExpectation extends tf.layers.Layer {
  static readonly className = "SpatialExpectation";

  override computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    const shape = inputShape as number[];
    return [shape[0], 2 * (shape[3] ?? 1)];
  }

  override call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    return tf.tidy(() => {
      const x = Array.isArray(inputs) ? inputs[0] : inputs;
      const [, height, width, channels] = x.shape as [number, number, number, number];
      const flat = tf.reshape(tf.transpose(x, [0, 3, 1, 2]), [-1, channels, height * width]);
      const probs = tf.softmax(flat, 2);
      const rows = tf.range(0, height).div(Math.max(1, height - 1)).mul(2).sub(1);
      const cols = tf.range(0, width).div(Math.max(1, width - 1)).mul(2).sub(1);
      const rowGrid = tf.reshape(tf.tile(tf.expandDims(rows, 1), [1, width]), [height * width]);
      const colGrid = tf.reshape(tf.tile(tf.expandDims(cols, 0), [height, 1]), [height * width]);
      const rowExp = tf.sum(probs.mul(rowGrid), 2);
      const colExp = tf.sum(probs.mul(colGrid), 2);
      return tf.concat([colExp, rowExp], 1); // [batch, 2*channels]
    });
  }

  override getConfig(): tf.serialization.ConfigDict {
    return super.getConfig();
  }
}

tf.serialization.registerClass(SpatialExpectation);

/** Reduced convolutional regressor: three conv blocks producing two score
 * maps, a spatial-expectation readout, and a linear output layer; no
 * dropout. Filter counts stay small so training is tractable on the pure-JS
 * backend.
 */
export function buildModel(seed: number): tf.LayersModel {
  const init = (offset: number) => tf.initializers.glorotUniform({ seed: seed + offset });
  const model = tf.sequential();
  model.add(
    tf.layers.conv2d({
      inputShape: [INPUT_SIZE, INPUT_SIZE, 1],
      filters: 6,
      kernelSize: 3,
      strides: 2,
      padding: "same",
      activation: "relu",
      kernelInitializer: init(1),
    }),
  );
  model.add(
    tf.layers.conv2d({
      filters: 8,
      kernelSize: 3,
      strides: 2,
      padding: "same",
      activation: "relu",
      kernelInitializer: init(2),
    }),
  );
  model.add(
    tf.layers.conv2d({
      filters: 2,
      kernelSize: 3,
      padding: "same",
      kernelInitializer: init(3),
    }),
  );
  model.add(new SpatialExpectation());
  model.add(tf.layers.dense({ units: 2, kernelInitializer: init(4) }));
  return model;
}

export async function saveModel(model: tf.LayersModel, dir: string, meta: ModelMeta): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify(
          {
            modelTopology: artifacts.modelTopology,
            weightSpecs: artifacts.weightSpecs,
          },
          null,
          2,
        ),
      );
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    }),
  );
  fs.writeFileSync(path.join(dir, "meta.json"), JSON.stringify(meta, null, 2));
}

export async function loadModel(dir: string): Promise<{ model: tf.LayersModel; meta: ModelMeta }> {
  const manifest = JSON.parse(fs.readFileSync(path.join(dir, "model.json"), "utf-8"));
  const weightData = fs.readFileSync(path.join(dir, "weights.bin"));
  const model = await tf.loadLayersModel({
    load: async () => ({
      modelTopology: manifest.modelTopology,
      weightSpecs: manifest.weightSpecs,
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength,
      ),
    }),
  });
  const meta = JSON.parse(fs.readFileSync(path.join(dir, "meta.json"), "utf-8")) as ModelMeta;
  return { model, meta };
}

/** Predict hole positions in pixels for preprocessed inputs. */
export function predictPx(model: tf.LayersModel, inputs: Float32Array[]): Array<[number, number]> {
  return tf.tidy(() => {
    const batch = tf.tensor4d(
      concatFloat32(inputs),
      [inputs.length, INPUT_SIZE, INPUT_SIZE, 1],
    );
    const out = model.predict(batch) as tf.Tensor2D;
    const values = out.dataSync();
    const result: Array<[number, number]> = [];
    for (let i = 0; i < inputs.length; i++) {
      result.push([values[2 * i] * LABEL_SCALE, values[2 * i + 1] * LABEL_SCALE]);
    }
    return result;
  });
}

export function defaultMeta(seed: number): ModelMeta {
  return { inputSize: INPUT_SIZE, pool: POOL, labelScale: LABEL_SCALE, seed };
}

function concatFloat32(parts: Float32Array[]): Float32Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Float32Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}
