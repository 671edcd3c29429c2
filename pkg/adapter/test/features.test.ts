import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { TemplateRecognizer } from "../src/asr";
import { denoiseAudio, denoiseFile } from "../src/denoise";
import { EMBED_DIM, embedAudio } from "../src/embed";
import { readWav, writeWav } from "../src/wav";

const FIXTURES = join(__dirname, "..", "fixtures");

function rms(samples: Float64Array): number {
  let sum = 0;
  for (const value of samples) sum += value * value;
  return Math.sqrt(sum / samples.length);
}

describe("embeddings", () => {
  it("are unit-norm with a constant dimension", () => {
    for (const name of ["probe_greeting", "probe_farewell", "noisy_tone"]) {
      const vector = embedAudio(readWav(join(FIXTURES, "audio", `${name}.wav`)));
      expect(vector.length).toBe(EMBED_DIM);
      const norm = Math.hypot(...vector);
      expect(norm).toBeCloseTo(1.0, 9);
    }
  });

  it("are deterministic for the same file", () => {
    const path = join(FIXTURES, "audio", "probe_greeting.wav");
    expect(embedAudio(readWav(path))).toEqual(embedAudio(readWav(path)));
  });

  it("separate different voices more than repeated reads", () => {
    const a = embedAudio(readWav(join(FIXTURES, "audio", "probe_greeting.wav")));
    const b = embedAudio(readWav(join(FIXTURES, "audio", "probe_farewell.wav")));
    const dot = a.reduce((sum, value, i) => sum + value * b[i], 0);
    expect(dot).toBeLessThan(0.999);
  });

  it("reject too-short audio", () => {
    expect(() => embedAudio({ samples: new Float64Array(8), sampleRate: 16000 })).toThrow(
      /too short/,
    );
  });
});

describe("template recognizer", () => {
  it("matches every probe to its template transcript", () => {
    const recognizer = TemplateRecognizer.load(join(FIXTURES, "templates"));
    expect(recognizer.transcribe(join(FIXTURES, "audio", "probe_greeting.wav"))).toBe(
      "hello there friend",
    );
    expect(recognizer.transcribe(join(FIXTURES, "audio", "probe_farewell.wav"))).toBe(
      "goodbye for now",
    );
    expect(recognizer.transcribe(join(FIXTURES, "audio", "probe_question.wav"))).toBe(
      "what time is it",
    );
  });

  it("fails to load an empty template directory", () => {
    const dir = mkdtempSync(join(tmpdir(), "templates-"));
    expect(() => TemplateRecognizer.load(dir)).toThrow(/no wav\/txt pairs/);
  });

  it("fails to load a template without a transcript", () => {
    const dir = mkdtempSync(join(tmpdir(), "templates-"));
    writeWav(join(dir, "orphan.wav"), {
      samples: new Float64Array(16000),
      sampleRate: 16000,
    });
    expect(() => TemplateRecognizer.load(dir)).toThrow(/no transcript/);
  });
});

describe("denoise", () => {
  it("reduces the noise floor of a noisy tone", () => {
    const noisy = readWav(join(FIXTURES, "audio", "noisy_tone.wav"));
    const cleaned = denoiseAudio(noisy);
    expect(cleaned.samples.length).toBe(noisy.samples.length);
    expect(rms(cleaned.samples)).toBeLessThan(rms(noisy.samples));
  });

  it("writes a sibling .denoised.wav and returns its path", () => {
    const dir = mkdtempSync(join(tmpdir(), "denoise-"));
    const src = join(dir, "input.wav");
    const noisy = readWav(join(FIXTURES, "audio", "noisy_tone.wav"));
    writeWav(src, noisy);
    const out = denoiseFile(src);
    expect(out).toBe(join(dir, "input.denoised.wav"));
    const back = readWav(out);
    expect(back.sampleRate).toBe(16000);
    expect(back.samples.length).toBe(noisy.samples.length);
  });

  it("passes very short audio through unchanged", () => {
    const tiny = { samples: new Float64Array([0.1, -0.1, 0.2]), sampleRate: 16000 };
    const out = denoiseAudio(tiny);
    expect(Array.from(out.samples)).toEqual(Array.from(tiny.samples));
  });
});
