import { DecodedImage, WireRequest, WireResponse } from "./types";

const BASE64_RE = /^[A-Za-z0-9+/]*={0,2}$/;

/** Encode one frame: decimal byte length, newline, UTF-8 JSON. */
export function encodeFrame(payload: unknown): Buffer {
  const body = Buffer.from(JSON.stringify(payload), "utf-8");
  return Buffer.concat([Buffer.from(`${body.length}\n`, "ascii"), body]);
}

/**
 * Incremental frame decoder.  Feed chunks, take complete payloads out.
 */
export class FrameDecoder {
  private buf = Buffer.alloc(0);

  push(chunk: Buffer): unknown[] {
    this.buf = Buffer.concat([this.buf, chunk]);
    const out: unknown[] = [];
    for (;;) {
      const nl = this.buf.indexOf(0x0a);
      if (nl < 0) break;
      const header = this.buf.subarray(0, nl).toString("ascii");
      const length = Number(header);
      if (!Number.isInteger(length) || length < 0) {
        throw new Error(`bad frame header ${JSON.stringify(header)}`);
      }
      if (this.buf.length < nl + 1 + length) break;
      const body = this.buf.subarray(nl + 1, nl + 1 + length);
      this.buf = this.buf.subarray(nl + 1 + length);
      out.push(JSON.parse(body.toString("utf-8")));
    }
    return out;
  }
}

/**
 * Strict pixel decoding: the base64 must be well-formed and decode to
 * exactly width * height * channels bytes.
 */
export function decodeImage(req: WireRequest): DecodedImage {
  const { width, height, channels, pixels } = req;
  if (!Number.isInteger(width) || width < 1 ||
      !Number.isInteger(height) || height < 1 ||
      (channels !== 1 && channels !== 3)) {
    throw new Error(`bad image header ${width}x${height}x${channels}`);
  }
  if (typeof pixels !== "string" || !BASE64_RE.test(pixels) ||
      pixels.length % 4 !== 0) {
    throw new Error("pixels is not valid base64");
  }
  const data = Buffer.from(pixels, "base64");
  const expect = width * height * channels;
  if (data.length !== expect) {
    throw new Error(`expected ${expect} pixel bytes, got ${data.length}`);
  }
  return { width, height, channels, data: new Uint8Array(data) };
}

export function errorResponse(id: string | null, err: unknown): WireResponse {
  const message = err instanceof Error ? err.message : String(err);
  return { id, kind: "error", message };
}
