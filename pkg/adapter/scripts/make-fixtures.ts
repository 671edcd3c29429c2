/**
 * Deterministically regenerate the committed test fixtures:
 *
 *   fixtures/templates/  three template recordings with transcripts (the
 *                        recognizer's "model")
 *   fixtures/audio/      probe recordings: noisy variants of each template
 *                        plus a plain noisy tone for embed/denoise tests
 *
 * Tones use a seeded PRNG for the noise component, so reruns are
 * byte-identical.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { writeWav } from "../src/wav.js";

const SAMPLE_RATE = 16000;
const HERE = dirname(fileURLToPath(import.meta.url));
const ROOT = join(HERE, "..", "..");

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** A melody: consecutive notes with per-sample noise, vaguely speech-shaped. */
function melody(notes: number[], noteDurationS: number, noise: number, seed: number): Float64Array {
  const perNote = Math.round(noteDurationS * SAMPLE_RATE);
  const rand = mulberry32(seed);
  const samples = new Float64Array(perNote * notes.length);
  let pos = 0;
  for (const freq of notes) {
    for (let i = 0; i < perNote; i++, pos++) {
      const value = 0.3 * Math.sin((2 * Math.PI * freq * i) / SAMPLE_RATE) + noise * (2 * rand() - 1);
      samples[pos] = Math.min(1, Math.max(-1, value));
    }
  }
  return samples;
}

const TEMPLATES: Array<{ name: string; notes: number[]; transcript: string }> = [
  { name: "greeting", notes: [220, 440, 330], transcript: "hello there friend" },
  { name: "farewell", notes: [510, 180, 320], transcript: "goodbye for now" },
  { name: "question", notes: [260, 700, 260], transcript: "what time is it" },
];

function main(): void {
  const templateDir = join(ROOT, "fixtures", "templates");
  const audioDir = join(ROOT, "fixtures", "audio");
  mkdirSync(templateDir, { recursive: true });
  mkdirSync(audioDir, { recursive: true });

  TEMPLATES.forEach((template, index) => {
    writeWav(join(templateDir, `${template.name}.wav`), {
      samples: melody(template.notes, 0.34, 0.002, 100 + index),
      sampleRate: SAMPLE_RATE,
    });
    writeFileSync(join(templateDir, `${template.name}.txt`), template.transcript + "\n");
    // Probe: same melody at a different tempo with a different, louder
    // noise draw; DTW must still land on the right template.
    writeWav(join(audioDir, `probe_${template.name}.wav`), {
      samples: melody(template.notes, 0.28, 0.02, 200 + index),
      sampleRate: SAMPLE_RATE,
    });
  });
  writeWav(join(audioDir, "noisy_tone.wav"), {
    samples: melody([300], 1.0, 0.15, 999),
    sampleRate: SAMPLE_RATE,
  });
  process.stderr.write("fixtures written\n");
}

main();
