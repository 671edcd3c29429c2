import { describe, expect, it } from "vitest";

import { dtwDistance, fft, hannWindow, ifft, melFilterbank, mfccFrames } from "../src/dsp";

function sine(freq: number, n: number, rate = 16000): Float64Array {
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) samples[i] = Math.sin((2 * Math.PI * freq * i) / rate);
  return samples;
}

describe("fft", () => {
  it("peaks at the tone's bin", () => {
    const n = 1024;
    const rate = 16000;
    const freq = (rate / n) * 64; // exactly bin 64
    const re = sine(freq, n, rate);
    const im = new Float64Array(n);
    fft(re, im);
    let best = 0;
    let bestMag = -1;
    for (let bin = 1; bin < n / 2; bin++) {
      const mag = Math.hypot(re[bin], im[bin]);
      if (mag > bestMag) {
        bestMag = mag;
        best = bin;
      }
    }
    expect(best).toBe(64);
  });

  it("ifft inverts fft", () => {
    const n = 256;
    const re = sine(440, n);
    const original = Float64Array.from(re);
    const im = new Float64Array(n);
    fft(re, im);
    ifft(re, im);
    for (let i = 0; i < n; i++) {
      expect(re[i]).toBeCloseTo(original[i], 9);
    }
  });

  it("rejects non-power-of-two sizes", () => {
    expect(() => fft(new Float64Array(100), new Float64Array(100))).toThrow(/power-of-two/);
  });
});

describe("mfcc", () => {
  it("frame count follows the framing formula", () => {
    const rate = 16000;
    const samples = new Float64Array(rate); // 1 s
    const frames = mfccFrames(samples, rate, { windowMs: 25, hopMs: 10 });
    const window = Math.floor(rate * 0.025);
    const hop = Math.floor(rate * 0.01);
    expect(frames.length).toBe(Math.floor((rate - window) / hop) + 1);
    expect(frames[0].length).toBe(13);
  });

  it("returns no frames for short input", () => {
    expect(mfccFrames(new Float64Array(10), 16000)).toEqual([]);
  });

  it("mel filters cover the band", () => {
    const bank = melFilterbank(26, 512, 16000);
    expect(bank.length).toBe(26);
    const coverage = new Float64Array(257);
    for (const filter of bank) {
      for (let bin = 0; bin < filter.length; bin++) coverage[bin] += filter[bin];
    }
    // Interior bins are covered by at least one triangle.
    for (let bin = 10; bin < 240; bin++) expect(coverage[bin]).toBeGreaterThan(0);
  });

  it("hann window is symmetric", () => {
    const window = hannWindow(100);
    for (let i = 0; i < 50; i++) expect(window[i]).toBeCloseTo(window[99 - i], 12);
  });
});

describe("dtw", () => {
  const features = (freqs: number[], perNote: number) => {
    const chunks = freqs.map((f) => sine(f, perNote));
    const joined = new Float64Array(perNote * freqs.length);
    chunks.forEach((chunk, i) => joined.set(chunk, i * perNote));
    return mfccFrames(joined, 16000);
  };

  it("distance to self is zero", () => {
    const a = features([220, 440], 4000);
    expect(dtwDistance(a, a)).toBeCloseTo(0, 9);
  });

  it("same melody at different tempo beats a different melody", () => {
    const melodyA = features([220, 440, 330], 5000);
    const melodyASlow = features([220, 440, 330], 7000);
    const melodyB = features([510, 180, 320], 5000);
    expect(dtwDistance(melodyASlow, melodyA)).toBeLessThan(dtwDistance(melodyASlow, melodyB));
  });

  it("empty sequences are infinitely far", () => {
    expect(dtwDistance([], features([220], 4000))).toBe(Number.POSITIVE_INFINITY);
  });
});
