/**
 * Spectral-subtraction noise suppression.
 *
 * The noise spectrum is estimated as a low percentile of the magnitude in
 * each STFT bin across the whole file, subtracted with a spectral floor,
 * and the result is resynthesized by windowed overlap-add. Output is a new
 * PCM16 file next to the input (`<name>.denoised.wav`).
 */

import { Audio, readWav, writeWav } from "./wav.js";
import { fft, hannWindow, ifft } from "./dsp.js";

const FRAME = 512;
const HOP = 128;
const OVERSUBTRACTION = 2.0;
const FLOOR = 0.05;
const NOISE_PERCENTILE = 0.2;

export function denoiseAudio(audio: Audio): Audio {
  const { samples, sampleRate } = audio;
  if (samples.length < FRAME) {
    return { samples: samples.slice(), sampleRate };
  }
  const window = hannWindow(FRAME);
  const nFrames = Math.floor((samples.length - FRAME) / HOP) + 1;
  const nBins = FRAME / 2 + 1;

  const magnitudes: Float64Array[] = [];
  const phasesRe: Float64Array[] = [];
  const phasesIm: Float64Array[] = [];
  for (let f = 0; f < nFrames; f++) {
    const re = new Float64Array(FRAME);
    const im = new Float64Array(FRAME);
    const start = f * HOP;
    for (let i = 0; i < FRAME; i++) re[i] = samples[start + i] * window[i];
    fft(re, im);
    const mag = new Float64Array(nBins);
    const phRe = new Float64Array(nBins);
    const phIm = new Float64Array(nBins);
    for (let bin = 0; bin < nBins; bin++) {
      const m = Math.hypot(re[bin], im[bin]);
      mag[bin] = m;
      phRe[bin] = m > 0 ? re[bin] / m : 1;
      phIm[bin] = m > 0 ? im[bin] / m : 0;
    }
    magnitudes.push(mag);
    phasesRe.push(phRe);
    phasesIm.push(phIm);
  }

  const noise = new Float64Array(nBins);
  const column = new Float64Array(nFrames);
  for (let bin = 0; bin < nBins; bin++) {
    for (let f = 0; f < nFrames; f++) column[f] = magnitudes[f][bin];
    const sorted = Float64Array.from(column).sort();
    noise[bin] = sorted[Math.floor(NOISE_PERCENTILE * (nFrames - 1))];
  }

  const out = new Float64Array(samples.length);
  const weight = new Float64Array(samples.length);
  const re = new Float64Array(FRAME);
  const im = new Float64Array(FRAME);
  for (let f = 0; f < nFrames; f++) {
    re.fill(0);
    im.fill(0);
    for (let bin = 0; bin < nBins; bin++) {
      const cleaned = Math.max(
        magnitudes[f][bin] - OVERSUBTRACTION * noise[bin],
        FLOOR * magnitudes[f][bin],
      );
      const valueRe = cleaned * phasesRe[f][bin];
      const valueIm = cleaned * phasesIm[f][bin];
      re[bin] = valueRe;
      im[bin] = valueIm;
      if (bin > 0 && bin < FRAME / 2) {
        re[FRAME - bin] = valueRe;
        im[FRAME - bin] = -valueIm;
      }
    }
    ifft(re, im);
    const start = f * HOP;
    for (let i = 0; i < FRAME; i++) {
      out[start + i] += re[i] * window[i];
      weight[start + i] += window[i] * window[i];
    }
  }
  for (let i = 0; i < out.length; i++) {
    out[i] = weight[i] > 1e-8 ? out[i] / weight[i] : samples[i];
    out[i] = Math.min(1, Math.max(-1, out[i]));
  }
  return { samples: out, sampleRate };
}

export function denoiseFile(path: string): string {
  const audio = readWav(path);
  const cleaned = denoiseAudio(audio);
  const outPath = path.replace(/\.wav$/i, "") + ".denoised.wav";
  writeWav(outPath, cleaned);
  return outPath;
}
