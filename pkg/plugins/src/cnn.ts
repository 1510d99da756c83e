#!/usr/bin/env node
/**
 * Optional CNN denoiser adapter.
 *
 * Serves a bank of pretrained tfjs layers models, one per noise level,
 * selecting the model whose training sigma is nearest the requested one.
 * The bank is a directory (argv[2] or SUREAMP_CNN_BANK) of subdirectories
 * named sigma_<value>/ each holding model.json + weight shards. Weights
 * are never vendored; without a bank the plugin stays up and answers every
 * request with a protocol error, so callers fail cleanly.
 *
 * Models take and return a 1xHxWx1 tensor on the [0, 1] intensity scale;
 * complex grids are denoised per channel.
 */

import * as fs from "fs";
import * as path from "path";

import { RequestHeader } from "./framing";
import { nearestLevel, requestSigma } from "./denoisers";
import { serve } from "./server";

export interface Bank {
  levels: number[];
  dirs: string[];
}

export function discoverBank(dir: string): Bank {
  const levels: number[] = [];
  const dirs: string[] = [];
  for (const entry of fs.readdirSync(dir).sort()) {
    const match = /^sigma_([0-9.]+)$/.exec(entry);
    if (match && fs.existsSync(path.join(dir, entry, "model.json"))) {
      levels.push(Number(match[1]));
      dirs.push(path.join(dir, entry));
    }
  }
  if (levels.length === 0) {
    throw new Error(`no sigma_<value>/model.json entries under ${dir}`);
  }
  return { levels, dirs };
}

function loadModelFromDisk(tf: any, dir: string): Promise<any> {
  const manifest = JSON.parse(
    fs.readFileSync(path.join(dir, "model.json"), "utf8"));
  const weightSpecs: any[] = [];
  const buffers: Buffer[] = [];
  for (const group of manifest.weightsManifest) {
    weightSpecs.push(...group.weights);
    for (const p of group.paths) {
      buffers.push(fs.readFileSync(path.join(dir, p)));
    }
  }
  const weightData = Buffer.concat(buffers);
  return tf.loadLayersModel(tf.io.fromMemory({
    modelTopology: manifest.modelTopology,
    weightSpecs,
    weightData: weightData.buffer.slice(
      weightData.byteOffset, weightData.byteOffset + weightData.byteLength),
  }));
}

function main(): void {
  const bankDir = process.argv[2] ?? process.env.SUREAMP_CNN_BANK;
  let bank: Bank | null = null;
  let tf: any = null;
  const models = new Map<number, any>();

  if (bankDir) {
    try {
      bank = discoverBank(bankDir);
      tf = require("@tensorflow/tfjs");
      process.stderr.write(
        `cnn adapter: ${bank.levels.length} levels from ${bankDir}\n`);
    } catch (err) {
      process.stderr.write(`cnn adapter: bank unavailable: ${err}\n`);
      bank = null;
    }
  } else {
    process.stderr.write(
      "cnn adapter: no model bank configured (argv or SUREAMP_CNN_BANK)\n");
  }

  serve(async (samples: Float32Array, header: RequestHeader) => {
    if (!bank || !tf) {
      throw new Error("cnn model bank not configured");
    }
    const h = header.h ?? 0;
    const w = header.w ?? 0;
    const channels = header.complex ? 2 : 1;
    const sigma = requestSigma(header);
    const level = nearestLevel(sigma, bank.levels);
    let model = models.get(level);
    if (!model) {
      model = await loadModelFromDisk(tf, bank.dirs[level]);
      models.set(level, model);
    }
    const out = new Float32Array(samples.length);
    for (let c = 0; c < channels; c++) {
      const channel = new Float32Array(h * w);
      for (let i = 0; i < h * w; i++) channel[i] = samples[i * channels + c];
      const input = tf.tensor4d(channel, [1, h, w, 1]);
      const prediction = model.predict(input);
      const data = await prediction.data();
      input.dispose();
      prediction.dispose();
      for (let i = 0; i < h * w; i++) out[i * channels + c] = data[i];
    }
    return out;
  });
}

if (require.main === module) {
  main();
}
