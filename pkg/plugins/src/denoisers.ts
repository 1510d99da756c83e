/**
 * The built-in denoiser maps. Samples arrive as float32, row-major;
 * complex grids interleave re,im so they are handled as two channels.
 */

import { RequestHeader } from "./framing";

export function identity(samples: Float32Array): Float32Array {
  return samples;
}

/** 3x3 periodic mean filter, applied per channel. */
export function blur3x3(samples: Float32Array, header: RequestHeader): Float32Array {
  const h = header.h ?? 0;
  const w = header.w ?? 0;
  const channels = header.complex ? 2 : 1;
  if (h * w * channels !== samples.length) {
    throw new Error(`payload length ${samples.length} does not match ${h}x${w}`);
  }
  const out = new Float32Array(samples.length);
  for (let c = 0; c < channels; c++) {
    for (let y = 0; y < h; y++) {
      const up = (y + h - 1) % h;
      const dn = (y + 1) % h;
      for (let x = 0; x < w; x++) {
        const lf = (x + w - 1) % w;
        const rt = (x + 1) % w;
        let acc = 0;
        for (const yy of [up, y, dn]) {
          for (const xx of [lf, x, rt]) {
            acc += samples[(yy * w + xx) * channels + c];
          }
        }
        out[(y * w + x) * channels + c] = acc / 9;
      }
    }
  }
  return out;
}

/** Representative noise std of a request, on the [0,1] image scale. */
export function requestSigma(header: RequestHeader): number {
  const noise = header.noise;
  if (!noise) throw new Error("request carries no noise model");
  if (noise.type === "white") {
    if (typeof noise.sigma !== "number") throw new Error("white noise needs sigma");
    return noise.sigma;
  }
  if (noise.type === "subband") {
    if (!Array.isArray(noise.tau) || noise.tau.length === 0) {
      throw new Error("subband noise needs tau");
    }
    const mean = noise.tau.reduce((a, b) => a + b, 0) / noise.tau.length;
    return Math.sqrt(mean);
  }
  throw new Error(`unknown noise type ${JSON.stringify(noise)}`);
}

/** Index of the trained level closest to sigma (ties go to the lower level). */
export function nearestLevel(sigma: number, levels: number[]): number {
  if (levels.length === 0) throw new Error("empty level bank");
  let best = 0;
  for (let i = 1; i < levels.length; i++) {
    if (Math.abs(levels[i] - sigma) < Math.abs(levels[best] - sigma)) best = i;
  }
  return best;
}
