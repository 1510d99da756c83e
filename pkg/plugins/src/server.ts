/**
 * Plugin-side request loop: handshake, then one response per request, in
 * order. Malformed frames get an error response and the loop continues;
 * {"op":"quit"} exits 0. Denoisers may be async; requests are processed
 * strictly sequentially so responses never reorder.
 */

import { FrameDecoder, RequestHeader, encodeFrame } from "./framing";

export const HANDSHAKE = { proto: "sure-amp-denoise", version: 1 };

export type Denoiser = (
  samples: Float32Array,
  header: RequestHeader,
) => Float32Array | Promise<Float32Array>;

export function serve(denoise: Denoiser,
                      stdin: NodeJS.ReadableStream = process.stdin,
                      stdout: NodeJS.WritableStream = process.stdout): void {
  stdout.write(encodeFrame(HANDSHAKE));
  const decoder = new FrameDecoder();
  let chain: Promise<void> = Promise.resolve();

  const handle = async (frame: { header?: RequestHeader; error?: string;
                                 payload: Buffer }) => {
    if (frame.error !== undefined) {
      stdout.write(encodeFrame({ status: "error", msg: frame.error }));
      return;
    }
    const header = frame.header as RequestHeader;
    if (header.op === "quit") {
      process.exit(0);
    }
    if (header.op !== "denoise") {
      stdout.write(encodeFrame({
        status: "error", msg: `unknown op ${JSON.stringify(header.op)}` }));
      return;
    }
    try {
      const samples = new Float32Array(
        frame.payload.buffer, frame.payload.byteOffset,
        frame.payload.byteLength / 4);
      const out = await denoise(samples, header);
      if (out.length !== samples.length) {
        throw new Error("denoiser changed the sample count");
      }
      stdout.write(encodeFrame({ status: "ok" },
                               Buffer.from(out.buffer, out.byteOffset,
                                           out.byteLength)));
    } catch (err) {
      stdout.write(encodeFrame({
        status: "error",
        msg: err instanceof Error ? err.message : String(err) }));
    }
  };

  stdin.on("data", (chunk: Buffer) => {
    for (const frame of decoder.push(chunk)) {
      chain = chain.then(() => handle(frame));
    }
  });

  stdin.on("end", () => {
    chain.then(() => process.exit(0));
  });
}
