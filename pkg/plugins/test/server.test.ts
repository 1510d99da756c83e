import { ChildProcess, spawn } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterEach, describe, expect, it } from "vitest";

import { FrameDecoder, RequestHeader, encodeFrame } from "../src/framing";

const DIST = path.join(__dirname, "..", "dist");

/** Minimal test-side client speaking the wire protocol. */
class Client {
  proc: ChildProcess;
  private decoder = new FrameDecoder();
  private queue: Array<{ header: any; payload: Buffer }> = [];
  private waiters: Array<(f: { header: any; payload: Buffer }) => void> = [];

  constructor(script: string, args: string[] = []) {
    this.proc = spawn(process.execPath, [path.join(DIST, script), ...args],
                      { stdio: ["pipe", "pipe", "pipe"] });
    this.proc.stdout!.on("data", (chunk: Buffer) => {
      // responses are headers followed by payloads whose size the client
      // knows; FrameDecoder computes zero for non-denoise headers, so pull
      // payloads out of the residual stream manually via expected sizes
      this.raw = Buffer.concat([this.raw, chunk]);
      this.drain();
    });
  }

  private raw = Buffer.alloc(0);
  private expected: number[] = [];

  expectPayload(bytes: number) {
    this.expected.push(bytes);
  }

  private drain() {
    for (;;) {
      if (this.raw.length < 11) return;
      const headLen = Number(this.raw.subarray(0, 10).toString("ascii"));
      if (this.raw.length < 11 + headLen) return;
      const header = JSON.parse(
        this.raw.subarray(11, 11 + headLen).toString("utf8"));
      let payloadLen = 0;
      if (header.status === "ok") {
        payloadLen = this.expected.shift() ?? 0;
      }
      if (this.raw.length < 11 + headLen + payloadLen) return;
      const payload = Buffer.from(
        this.raw.subarray(11 + headLen, 11 + headLen + payloadLen));
      this.raw = this.raw.subarray(11 + headLen + payloadLen);
      const frame = { header, payload };
      const waiter = this.waiters.shift();
      if (waiter) waiter(frame);
      else this.queue.push(frame);
    }
  }

  next(timeoutMs = 5000): Promise<{ header: any; payload: Buffer }> {
    const ready = this.queue.shift();
    if (ready) return Promise.resolve(ready);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("timed out waiting for a frame")), timeoutMs);
      this.waiters.push((f) => { clearTimeout(timer); resolve(f); });
    });
  }

  send(header: RequestHeader | object, payload: Buffer = Buffer.alloc(0)) {
    this.proc.stdin!.write(encodeFrame(header, payload));
  }

  exitCode(timeoutMs = 5000): Promise<number | null> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error("plugin did not exit")), timeoutMs);
      this.proc.on("exit", (code) => { clearTimeout(timer); resolve(code); });
    });
  }

  kill() {
    this.proc.kill("SIGKILL");
  }
}

function whiteRequest(h: number, w: number, payload: Buffer): RequestHeader {
  return { op: "denoise", h, w, complex: false,
           noise: { type: "white", sigma: 0.25 } };
}

let client: Client;
afterEach(() => client?.kill());

describe("identity plugin", () => {
  it("handshakes before anything else", async () => {
    client = new Client("identity.js");
    const first = await client.next();
    expect(first.header).toEqual({ proto: "sure-amp-denoise", version: 1 });
  });

  it("echoes the payload byte-for-byte", async () => {
    client = new Client("identity.js");
    await client.next(); // handshake
    const payload = Buffer.alloc(4 * 6 * 4);
    for (let i = 0; i < 24; i++) payload.writeFloatLE(Math.sin(i) * 3, i * 4);
    client.expectPayload(payload.length);
    client.send(whiteRequest(4, 6, payload), payload);
    const reply = await client.next();
    expect(reply.header).toEqual({ status: "ok" });
    expect(reply.payload.equals(payload)).toBe(true);
  });

  it("answers a malformed header with an error and stays alive", async () => {
    client = new Client("identity.js");
    await client.next();
    client.proc.stdin!.write(Buffer.from("0000000007\nnotjson", "ascii"));
    const err = await client.next();
    expect(err.header.status).toBe("error");
    const payload = Buffer.alloc(16, 1);
    client.expectPayload(16);
    client.send(whiteRequest(2, 2, payload), payload);
    const reply = await client.next();
    expect(reply.header).toEqual({ status: "ok" });
  });

  it("rejects unknown ops but keeps serving", async () => {
    client = new Client("identity.js");
    await client.next();
    client.send({ op: "transmogrify" });
    const err = await client.next();
    expect(err.header.status).toBe("error");
    expect(err.header.msg).toContain("transmogrify");
  });

  it("exits 0 on quit", async () => {
    client = new Client("identity.js");
    await client.next();
    client.send({ op: "quit" });
    expect(await client.exitCode()).toBe(0);
  });
});

describe("blur plugin", () => {
  it("reduces the sample variance of a noisy flat image", async () => {
    client = new Client("blur.js");
    await client.next();
    const n = 32 * 32;
    const payload = Buffer.alloc(n * 4);
    let state = 99;
    const values: number[] = [];
    for (let i = 0; i < n; i++) {
      state = (state * 1103515245 + 12345) & 0x7fffffff;
      const v = state / 0x7fffffff - 0.5;
      values.push(v);
      payload.writeFloatLE(v, i * 4);
    }
    client.expectPayload(payload.length);
    client.send(whiteRequest(32, 32, payload), payload);
    const reply = await client.next();
    expect(reply.header.status).toBe("ok");
    const out: number[] = [];
    for (let i = 0; i < n; i++) out.push(reply.payload.readFloatLE(i * 4));
    const variance = (vs: number[]) => {
      const mean = vs.reduce((a, b) => a + b, 0) / vs.length;
      return vs.reduce((a, b) => a + (b - mean) ** 2, 0) / vs.length;
    };
    expect(variance(out)).toBeLessThan(variance(values));
  });
});

describe("cnn adapter without a model bank", () => {
  it("stays alive and reports a clean error per request", async () => {
    client = new Client("cnn.js");
    await client.next();
    const payload = Buffer.alloc(16, 0);
    client.send(whiteRequest(2, 2, payload), payload);
    const reply = await client.next();
    expect(reply.header.status).toBe("error");
    expect(reply.header.msg).toContain("not configured");
    client.send({ op: "quit" });
    expect(await client.exitCode()).toBe(0);
  });
});

describe("cnn bank discovery", () => {
  it("finds sigma-labelled model directories", async () => {
    const { discoverBank } = await import("../src/cnn");
    const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "bank-"));
    for (const sigma of ["0.10", "0.50"]) {
      const dir = path.join(tmp, `sigma_${sigma}`);
      fs.mkdirSync(dir);
      fs.writeFileSync(path.join(dir, "model.json"), "{}");
    }
    fs.mkdirSync(path.join(tmp, "not_a_model"));
    const bank = discoverBank(tmp);
    expect(bank.levels).toEqual([0.1, 0.5]);
    expect(() => discoverBank(path.join(tmp, "not_a_model"))).toThrow();
  });
});
