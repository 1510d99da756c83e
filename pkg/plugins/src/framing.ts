/**
 * Wire framing for the sure-amp-denoise protocol.
 *
 * frame = 10-byte zero-padded ASCII decimal header length + "\n"
 *         + JSON header + raw little-endian float32 payload
 *
 * The payload length is not part of the frame; it follows from the header
 * (h * w * (complex ? 2 : 1) float32 samples for denoise traffic, zero
 * otherwise), so the decoder is fed an expected payload size per header.
 */

export const LEN_DIGITS = 10;

export function encodeFrame(header: unknown, payload: Buffer = Buffer.alloc(0)): Buffer {
  const head = Buffer.from(JSON.stringify(header), "utf8");
  const prefix = Buffer.from(
    head.length.toString().padStart(LEN_DIGITS, "0") + "\n", "ascii");
  return Buffer.concat([prefix, head, payload]);
}

export interface NoiseHeader {
  type: "white" | "subband";
  sigma?: number;
  tau?: number[];
}

export interface RequestHeader {
  op: "denoise" | "quit";
  h?: number;
  w?: number;
  complex?: boolean;
  noise?: NoiseHeader;
}

export function payloadBytes(header: RequestHeader): number {
  if (header.op !== "denoise") return 0;
  const channels = header.complex ? 2 : 1;
  return (header.h ?? 0) * (header.w ?? 0) * channels * 4;
}

/**
 * Incremental decoder: feed chunks, emits {header, payload} frames.
 * A header that fails to parse is surfaced as {error} so the server can
 * answer with a protocol error and keep the stream position consistent
 * (malformed headers are only expected on payload-less frames).
 */
export class FrameDecoder {
  private buffer: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Array<{ header?: RequestHeader; error?: string; payload: Buffer }> {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    const frames: Array<{ header?: RequestHeader; error?: string; payload: Buffer }> = [];
    for (;;) {
      if (this.buffer.length < LEN_DIGITS + 1) break;
      const prefix = this.buffer.subarray(0, LEN_DIGITS).toString("ascii");
      const headLen = Number(prefix);
      if (!Number.isInteger(headLen) || headLen < 0 ||
          this.buffer[LEN_DIGITS] !== 0x0a) {
        frames.push({ error: `bad length prefix ${JSON.stringify(prefix)}`,
                      payload: Buffer.alloc(0) });
        this.buffer = Buffer.alloc(0); // stream is unrecoverable
        break;
      }
      if (this.buffer.length < LEN_DIGITS + 1 + headLen) break;
      const rawHeader = this.buffer.subarray(LEN_DIGITS + 1, LEN_DIGITS + 1 + headLen);
      let header: RequestHeader;
      try {
        header = JSON.parse(rawHeader.toString("utf8"));
      } catch {
        this.buffer = this.buffer.subarray(LEN_DIGITS + 1 + headLen);
        frames.push({ error: "malformed header", payload: Buffer.alloc(0) });
        continue;
      }
      const need = payloadBytes(header);
      if (this.buffer.length < LEN_DIGITS + 1 + headLen + need) break;
      const payload = this.buffer.subarray(
        LEN_DIGITS + 1 + headLen, LEN_DIGITS + 1 + headLen + need);
      this.buffer = this.buffer.subarray(LEN_DIGITS + 1 + headLen + need);
      frames.push({ header, payload: Buffer.from(payload) });
    }
    return frames;
  }
}
