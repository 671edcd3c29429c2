/**
 * Signal-processing building blocks: FFT, framing, mel-cepstral features,
 * and dynamic time warping over feature sequences.
 */

/** In-place iterative radix-2 FFT; lengths must be powers of two. */
export function fft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if (n !== im.length || (n & (n - 1)) !== 0) {
    throw new Error(`fft needs power-of-two buffers, got ${n}`);
  }
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const angle = (-2 * Math.PI) / len;
    const stepRe = Math.cos(angle);
    const stepIm = Math.sin(angle);
    for (let base = 0; base < n; base += len) {
      let wRe = 1;
      let wIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const a = base + k;
        const b = base + k + len / 2;
        const vRe = re[b] * wRe - im[b] * wIm;
        const vIm = re[b] * wIm + im[b] * wRe;
        re[b] = re[a] - vRe;
        im[b] = im[a] - vIm;
        re[a] += vRe;
        im[a] += vIm;
        const nextRe = wRe * stepRe - wIm * stepIm;
        wIm = wRe * stepIm + wIm * stepRe;
        wRe = nextRe;
      }
    }
  }
}

/** Inverse FFT via the conjugation identity. */
export function ifft(re: Float64Array, im: Float64Array): void {
  for (let i = 0; i < im.length; i++) im[i] = -im[i];
  fft(re, im);
  const n = re.length;
  for (let i = 0; i < n; i++) {
    re[i] /= n;
    im[i] = -im[i] / n;
  }
}

export function hannWindow(size: number): Float64Array {
  const window = new Float64Array(size);
  for (let i = 0; i < size; i++) {
    window[i] = 0.5 * (1 - Math.cos((2 * Math.PI * i) / (size - 1)));
  }
  return window;
}

export function hammingWindow(size: number): Float64Array {
  const window = new Float64Array(size);
  for (let i = 0; i < size; i++) {
    window[i] = 0.54 - 0.46 * Math.cos((2 * Math.PI * i) / (size - 1));
  }
  return window;
}

function hzToMel(hz: number): number {
  return 2595 * Math.log10(1 + hz / 700);
}

function melToHz(mel: number): number {
  return 700 * (10 ** (mel / 2595) - 1);
}

export function melFilterbank(nMels: number, nFft: number, sampleRate: number): Float64Array[] {
  const nBins = nFft / 2 + 1;
  const maxMel = hzToMel(sampleRate / 2);
  const centers: number[] = [];
  for (let m = 0; m < nMels + 2; m++) {
    centers.push(melToHz((maxMel * m) / (nMels + 1)));
  }
  const bank: Float64Array[] = [];
  for (let m = 0; m < nMels; m++) {
    const [left, center, right] = [centers[m], centers[m + 1], centers[m + 2]];
    const filter = new Float64Array(nBins);
    for (let bin = 0; bin < nBins; bin++) {
      const freq = (bin * sampleRate) / nFft;
      const rise = (freq - left) / Math.max(center - left, 1e-12);
      const fall = (right - freq) / Math.max(right - center, 1e-12);
      filter[bin] = Math.max(0, Math.min(rise, fall));
    }
    bank.push(filter);
  }
  return bank;
}

function dctII(values: Float64Array, nCoeffs: number): Float64Array {
  const n = values.length;
  const out = new Float64Array(nCoeffs);
  for (let k = 0; k < nCoeffs; k++) {
    let sum = 0;
    for (let i = 0; i < n; i++) {
      sum += values[i] * Math.cos((Math.PI * k * (2 * i + 1)) / (2 * n));
    }
    const scale = k === 0 ? Math.sqrt(1 / (4 * n)) : Math.sqrt(1 / (2 * n));
    out[k] = 2 * sum * scale;
  }
  return out;
}

export interface MfccOptions {
  windowMs?: number;
  hopMs?: number;
  nMels?: number;
  nCoeffs?: number;
  preEmphasis?: number;
}

/** MFCC frames over mono audio; returns one Float64Array per frame. */
export function mfccFrames(
  samples: Float64Array,
  sampleRate: number,
  options: MfccOptions = {},
): Float64Array[] {
  const windowMs = options.windowMs ?? 25;
  const hopMs = options.hopMs ?? 10;
  const nMels = options.nMels ?? 26;
  const nCoeffs = options.nCoeffs ?? 13;
  const preEmphasis = options.preEmphasis ?? 0.97;

  const window = Math.floor((sampleRate * windowMs) / 1000);
  const hop = Math.floor((sampleRate * hopMs) / 1000);
  let nFft = 1;
  while (nFft < window) nFft <<= 1;

  if (samples.length < window) return [];
  const nFrames = Math.floor((samples.length - window) / hop) + 1;
  const hamming = hammingWindow(window);
  const bank = melFilterbank(nMels, nFft, sampleRate);
  const frames: Float64Array[] = [];

  const re = new Float64Array(nFft);
  const im = new Float64Array(nFft);
  for (let f = 0; f < nFrames; f++) {
    const start = f * hop;
    re.fill(0);
    im.fill(0);
    re[0] = samples[start] * hamming[0];
    for (let i = 1; i < window; i++) {
      re[i] = (samples[start + i] - preEmphasis * samples[start + i - 1]) * hamming[i];
    }
    fft(re, im);
    const nBins = nFft / 2 + 1;
    const power = new Float64Array(nBins);
    for (let bin = 0; bin < nBins; bin++) {
      power[bin] = re[bin] * re[bin] + im[bin] * im[bin];
    }
    const logMel = new Float64Array(nMels);
    for (let m = 0; m < nMels; m++) {
      let energy = 0;
      const filter = bank[m];
      for (let bin = 0; bin < nBins; bin++) energy += power[bin] * filter[bin];
      logMel[m] = Math.log(Math.max(energy, 1e-10));
    }
    frames.push(dctII(logMel, nCoeffs));
  }
  return frames;
}

function frameDistance(a: Float64Array, b: Float64Array): number {
  let sum = 0;
  for (let i = 0; i < a.length; i++) {
    const diff = a[i] - b[i];
    sum += diff * diff;
  }
  return Math.sqrt(sum);
}

/** Path-length-normalized DTW distance between two feature sequences. */
export function dtwDistance(a: Float64Array[], b: Float64Array[]): number {
  if (a.length === 0 || b.length === 0) return Number.POSITIVE_INFINITY;
  const n = a.length;
  const m = b.length;
  const INF = Number.POSITIVE_INFINITY;
  let prev = new Float64Array(m + 1).fill(INF);
  let prevSteps = new Uint32Array(m + 1);
  prev[0] = 0;
  for (let i = 1; i <= n; i++) {
    const cur = new Float64Array(m + 1).fill(INF);
    const curSteps = new Uint32Array(m + 1);
    for (let j = 1; j <= m; j++) {
      const cost = frameDistance(a[i - 1], b[j - 1]);
      let best = prev[j - 1];
      let steps = prevSteps[j - 1];
      if (prev[j] < best) {
        best = prev[j];
        steps = prevSteps[j];
      }
      if (cur[j - 1] < best) {
        best = cur[j - 1];
        steps = curSteps[j - 1];
      }
      if (best === INF) continue;
      cur[j] = best + cost;
      curSteps[j] = steps + 1;
    }
    prev = cur;
    prevSteps = curSteps;
  }
  if (prev[m] === INF) return INF;
  return prev[m] / prevSteps[m];
}
