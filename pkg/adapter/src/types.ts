/**
 * Wire protocol types, bit-exact field names.
 *
 * Stdio framing: each message is "<decimal byte length>\n" followed by that
 * many bytes of UTF-8 JSON.  HTTP transport POSTs one WireRequest per call
 * and receives one WireResponse, same payload schema.
 */

export interface WireRequest {
  id: string;
  width: number;
  height: number;
  channels: number;
  /** base64 of raw row-major channel-interleaved uint8 bytes */
  pixels: string;
}

export interface LabelScore {
  label: string;
  /** optional: rank order is authoritative when absent */
  score?: number;
}

export type WireResponse =
  | { id: string | null; kind: "classification"; labels: LabelScore[] }
  | { id: string | null; kind: "regression"; value: number }
  | { id: string | null; kind: "error"; message: string };

/** Decoded image handed to predictors: no resizing, no normalization. */
export interface DecodedImage {
  width: number;
  height: number;
  channels: number;
  /** length = width * height * channels, row-major channel-interleaved */
  data: Uint8Array;
}

export type PredictorResult =
  | { kind: "classification"; labels: LabelScore[] }
  | { kind: "regression"; value: number };

export type Predictor = (img: DecodedImage) => PredictorResult;

export type Task = "classification" | "regression";
