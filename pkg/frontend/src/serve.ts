import * as path from "node:path";
import * as readline from "node:readline";

import * as tf from "@tensorflow/tfjs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadModel, predictPx } from "./model.js";
import { preprocess } from "./preprocess.js";

interface Request {
  id: number;
  width: number;
  height: number;
  pixels_b64: string;
}

export function decodeRequest(line: string): { id: number; pixels: Uint8Array; width: number; height: number } {
  let msg: Partial<Request>;
  try {
    msg = JSON.parse(line);
  } catch {
    throw new ProtocolFault(-1, "invalid JSON frame");
  }
  const id = typeof msg.id === "number" ? msg.id : -1;
  if (
    typeof msg.width !== "number" ||
    typeof msg.height !== "number" ||
    typeof msg.pixels_b64 !== "string"
  ) {
    throw new ProtocolFault(id, "missing width/height/pixels_b64");
  }
  let raw: Buffer;
  try {
    raw = Buffer.from(msg.pixels_b64, "base64");
    // Buffer.from silently ignores junk; verify the round trip
    if (raw.toString("base64").replace(/=+$/, "") !== msg.pixels_b64.replace(/=+$/, "")) {
      throw new Error("bad base64");
    }
  } catch {
    throw new ProtocolFault(id, "pixels_b64 is not valid base64");
  }
  if (raw.length !== msg.width * msg.height) {
    throw new ProtocolFault(id, `payload is ${raw.length} bytes, expected ${msg.width * msg.height}`);
  }
  return { id, pixels: new Uint8Array(raw), width: msg.width, height: msg.height };
}

class ProtocolFault extends Error {
  constructor(
    public readonly id: number,
    message: string,
  ) {
    super(message);
  }
}

/** Answer protocol requests on stdin until it closes; one response per
 * request, in order. Malformed frames get an error response and the server
 * stays alive. */
export async function serve(modelDir: string): Promise<void> {
  await tf.setBackend("cpu");
  await tf.ready();
  const { model } = await loadModel(modelDir);
  // warm up so the first real request is fast
  predictPx(model, [new Float32Array(40 * 40)]);

  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  let chain: Promise<void> = Promise.resolve();
  rl.on("line", (line) => {
    chain = chain.then(() => {
      if (line.trim().length === 0) return;
      let id = -1;
      try {
        const request = decodeRequest(line);
        id = request.id;
        const input = preprocess(request.pixels, request.width, request.height);
        const [[x, y]] = predictPx(model, [input]);
        process.stdout.write(JSON.stringify({ id, x, y }) + "\n");
      } catch (err) {
        if (err instanceof ProtocolFault) {
          id = err.id;
        }
        const message = err instanceof Error ? err.message : String(err);
        process.stdout.write(JSON.stringify({ id, error: message }) + "\n");
      }
    });
  });
  await new Promise<void>((resolve) => rl.on("close", resolve));
  await chain;
}

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .option("model", { type: "string", demandOption: true })
    .strict()
    .parse();
  await serve(argv.model);
}

const isCliEntry = process.argv[1] !== undefined && import.meta.url.endsWith(path.basename(process.argv[1]));
if (isCliEntry) {
  main().catch((err) => {
    process.stderr.write(`serve failed: ${err}\n`);
    process.exit(1);
  });
}
