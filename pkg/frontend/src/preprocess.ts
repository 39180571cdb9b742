/** Shared image preprocessing for training and serving.
 *
 * The regressor runs on an average-pooled, [0,1]-normalized copy of the
 * camera view; keeping this in one place guarantees served predictions match
 * offline ones exactly.
 */

export const FULL_SIZE = 160;
export const POOL = 4;
export const INPUT_SIZE = FULL_SIZE / POOL;
export const LABEL_SCALE = 66; // px; network targets are label/LABEL_SCALE

export function downsample(pixels: Uint8Array, size: number, pool: number): Float32Array {
  if (pixels.length !== size * size) {
    throw new Error(`expected ${size * size} pixels, got ${pixels.length}`);
  }
  if (size % pool !== 0) {
    throw new Error(`pool ${pool} does not divide size ${size}`);
  }
  const out = size / pool;
  const result = new Float32Array(out * out);
  const norm = 1 / (pool * pool * 255);
  for (let r = 0; r < out; r++) {
    for (let c = 0; c < out; c++) {
      let sum = 0;
      for (let dr = 0; dr < pool; dr++) {
        const row = (r * pool + dr) * size + c * pool;
        for (let dc = 0; dc < pool; dc++) {
          sum += pixels[row + dc];
        }
      }
      result[r * out + c] = sum * norm;
    }
  }
  // center per image: backgrounds vary over the full intensity range, and the
  // hole only shows up as local contrast against them
  let mean = 0;
  for (let i = 0; i < result.length; i++) mean += result[i];
  mean /= result.length;
  for (let i = 0; i < result.length; i++) result[i] -= mean;
  return result;
}

export function preprocess(pixels: Uint8Array, width: number, height: number): Float32Array {
  if (width !== FULL_SIZE || height !== FULL_SIZE) {
    throw new Error(`model expects ${FULL_SIZE}x${FULL_SIZE} input, got ${width}x${height}`);
  }
  return downsample(pixels, FULL_SIZE, POOL);
}
