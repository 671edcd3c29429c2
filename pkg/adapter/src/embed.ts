/**
 * Utterance-level speaker embeddings from mel-cepstral statistics.
 *
 * Mean and standard deviation of each MFCC coefficient are pooled over the
 * utterance and unit-normalized, giving a 26-dimensional voice signature:
 * the classic pre-neural speaker-verification recipe, deterministic and
 * model-free.
 */

import { Audio } from "./wav.js";
import { mfccFrames } from "./dsp.js";

export const EMBED_DIM = 26;

export function embedAudio(audio: Audio): number[] {
  const frames = mfccFrames(audio.samples, audio.sampleRate);
  if (frames.length === 0) {
    throw new Error("audio too short to embed (needs one analysis window)");
  }
  const nCoeffs = frames[0].length;
  const mean = new Float64Array(nCoeffs);
  for (const frame of frames) {
    for (let i = 0; i < nCoeffs; i++) mean[i] += frame[i];
  }
  for (let i = 0; i < nCoeffs; i++) mean[i] /= frames.length;

  const std = new Float64Array(nCoeffs);
  for (const frame of frames) {
    for (let i = 0; i < nCoeffs; i++) {
      const diff = frame[i] - mean[i];
      std[i] += diff * diff;
    }
  }
  for (let i = 0; i < nCoeffs; i++) std[i] = Math.sqrt(std[i] / frames.length);

  const vector = new Float64Array(EMBED_DIM);
  vector.set(mean, 0);
  vector.set(std, nCoeffs);
  let norm = 0;
  for (let i = 0; i < vector.length; i++) norm += vector[i] * vector[i];
  norm = Math.sqrt(norm);
  if (norm === 0) throw new Error("degenerate embedding (zero norm)");
  return Array.from(vector, (v) => v / norm);
}
