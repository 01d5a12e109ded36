/**
 * Example predictors mirroring the verifier's builtin toy models, used for
 * integration tests and as templates for wrapping real models.  Arithmetic
 * matches the builtins exactly: integer sums are exact in doubles, so the
 * predictions agree bit-for-bit across the two implementations.
 */
import { DecodedImage, LabelScore, Predictor, PredictorResult, Task } from "./types";

function rankLabels(labels: LabelScore[]): LabelScore[] {
  return [...labels].sort((a, b) =>
    (b.score ?? 0) - (a.score ?? 0) || (a.label < b.label ? -1 : 1));
}

/** label c<floor(mean/32)>, score 1 at the winner, linear falloff by |m-win|/8 */
export const meanIntensity: Predictor = (img: DecodedImage): PredictorResult => {
  let sum = 0;
  for (const v of img.data) sum += v;
  const mean = sum / img.data.length;
  const win = Math.min(Math.floor(mean / 32), 7);
  const labels: LabelScore[] = [];
  for (let m = 0; m < 8; m++) {
    labels.push({ label: `c${m}`, score: 1.0 - Math.abs(m - win) / 8.0 });
  }
  return { kind: "classification", labels: rankLabels(labels) };
};

/** normalized x-offset of the intensity centroid, in [-1, 1] */
export const centroid: Predictor = (img: DecodedImage): PredictorResult => {
  const { width, height, channels, data } = img;
  let total = 0;
  let moment = 0;
  for (let j = 0; j < height; j++) {
    for (let i = 0; i < width; i++) {
      let w = 0;
      const base = (j * width + i) * channels;
      for (let ch = 0; ch < channels; ch++) w += data[base + ch];
      total += w;
      moment += w * i;
    }
  }
  if (total === 0 || width === 1) return { kind: "regression", value: 0.0 };
  const cx = (width - 1) / 2.0;
  return { kind: "regression", value: (moment / total - cx) / cx };
};

export const constantClass: Predictor = (): PredictorResult => ({
  kind: "classification",
  labels: rankLabels(Array.from({ length: 8 }, (_, m) => ({
    label: `c${m}`, score: 1.0 - m / 8.0 }))),
});

export const constantReg: Predictor = (): PredictorResult => ({
  kind: "regression", value: 0.0 });

export const PREDICTORS: Record<string, { fn: Predictor; task: Task }> = {
  "mean-intensity": { fn: meanIntensity, task: "classification" },
  "centroid": { fn: centroid, task: "regression" },
  "constant-class": { fn: constantClass, task: "classification" },
  "constant-reg": { fn: constantReg, task: "regression" },
};
