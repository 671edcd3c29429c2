import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { readWav, writeWav } from "../src/wav";

function sine(freq: number, n: number, rate = 16000): Float64Array {
  const samples = new Float64Array(n);
  for (let i = 0; i < n; i++) samples[i] = 0.5 * Math.sin((2 * Math.PI * freq * i) / rate);
  return samples;
}

describe("wav io", () => {
  it("round-trips PCM16 within quantization error", () => {
    const dir = mkdtempSync(join(tmpdir(), "wav-"));
    const path = join(dir, "tone.wav");
    const samples = sine(440, 16000);
    writeWav(path, { samples, sampleRate: 16000 });
    const back = readWav(path);
    expect(back.sampleRate).toBe(16000);
    expect(back.samples.length).toBe(16000);
    let maxDiff = 0;
    for (let i = 0; i < samples.length; i++) {
      maxDiff = Math.max(maxDiff, Math.abs(back.samples[i] - samples[i]));
    }
    expect(maxDiff).toBeLessThanOrEqual(1 / 32768);
  });

  it("averages stereo down to mono", () => {
    const dir = mkdtempSync(join(tmpdir(), "wav-"));
    const path = join(dir, "stereo.wav");
    const n = 100;
    const payload = Buffer.alloc(n * 4);
    for (let i = 0; i < n; i++) {
      payload.writeInt16LE(1000, 4 * i);
      payload.writeInt16LE(-1000, 4 * i + 2);
    }
    const header = Buffer.alloc(44);
    header.write("RIFF", 0, "ascii");
    header.writeUInt32LE(36 + payload.length, 4);
    header.write("WAVE", 8, "ascii");
    header.write("fmt ", 12, "ascii");
    header.writeUInt32LE(16, 16);
    header.writeUInt16LE(1, 20);
    header.writeUInt16LE(2, 22);
    header.writeUInt32LE(16000, 24);
    header.writeUInt32LE(64000, 28);
    header.writeUInt16LE(4, 32);
    header.writeUInt16LE(16, 34);
    header.write("data", 36, "ascii");
    header.writeUInt32LE(payload.length, 40);
    writeFileSync(path, Buffer.concat([header, payload]));
    const audio = readWav(path);
    expect(audio.samples.length).toBe(n);
    for (const value of audio.samples) expect(value).toBe(0);
  });

  it("rejects non-wav files", () => {
    const dir = mkdtempSync(join(tmpdir(), "wav-"));
    const path = join(dir, "nope.wav");
    writeFileSync(path, "definitely not audio");
    expect(() => readWav(path)).toThrow(/RIFF/);
  });
});
