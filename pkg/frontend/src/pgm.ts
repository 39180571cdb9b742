/** Binary PGM (P5, maxval 255) parsing and writing. */

export interface RasterImage {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major
}

export function parsePgm(data: Buffer): RasterImage {
  if (data.length < 2 || data[0] !== 0x50 || data[1] !== 0x35) {
    throw new Error("not a binary PGM (P5) file");
  }
  const tokens: string[] = [];
  let pos = 2;
  while (tokens.length < 3) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (pos < data.length && data[pos] === 0x23) {
      // '#' comment runs to end of line
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    const start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    if (start === pos) throw new Error("truncated PGM header");
    tokens.push(data.subarray(start, pos).toString("ascii"));
  }
  pos++; // single whitespace byte after maxval
  const [width, height, maxval] = tokens.map(Number);
  if (!Number.isInteger(width) || !Number.isInteger(height) || maxval !== 255) {
    throw new Error(`unsupported PGM header: ${tokens.join(" ")}`);
  }
  const raster = data.subarray(pos, pos + width * height);
  if (raster.length !== width * height) {
    throw new Error("PGM raster size mismatch");
  }
  return { width, height, pixels: new Uint8Array(raster) };
}

export function writePgm(image: RasterImage): Buffer {
  const header = Buffer.from(`P5\n${image.width} ${image.height}\n255\n`, "ascii");
  return Buffer.concat([header, Buffer.from(image.pixels)]);
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}
