/**
 * Template-matching speech recognizer.
 *
 * The "model" is a directory of reference recordings: each `<name>.wav`
 * paired with a `<name>.txt` transcript. Recognition extracts MFCC frames
 * from the input and returns the transcript of the template with the lowest
 * DTW distance. Small-vocabulary and deliberately simple, but a genuine
 * offline acoustic recognizer with no cloud dependency.
 */

import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { dtwDistance, mfccFrames } from "./dsp.js";
import { readWav } from "./wav.js";

interface Template {
  name: string;
  transcript: string;
  frames: Float64Array[];
}

/**
 * Cepstral mean normalization: subtracting each coefficient's utterance
 * mean removes constant spectral offsets (level and noise-floor mismatch
 * between a probe and its template), which would otherwise dominate the
 * DTW distance.
 */
function cmn(frames: Float64Array[]): Float64Array[] {
  if (frames.length === 0) return frames;
  const nCoeffs = frames[0].length;
  const mean = new Float64Array(nCoeffs);
  for (const frame of frames) {
    for (let i = 0; i < nCoeffs; i++) mean[i] += frame[i];
  }
  for (let i = 0; i < nCoeffs; i++) mean[i] /= frames.length;
  return frames.map((frame) => {
    const out = new Float64Array(nCoeffs);
    for (let i = 0; i < nCoeffs; i++) out[i] = frame[i] - mean[i];
    return out;
  });
}

export class TemplateRecognizer {
  private templates: Template[];

  constructor(templates: Template[]) {
    if (templates.length === 0) {
      throw new Error("asr template directory contains no wav/txt pairs");
    }
    this.templates = templates;
  }

  static load(dir: string): TemplateRecognizer {
    let entries: string[];
    try {
      entries = readdirSync(dir);
    } catch (err) {
      throw new Error(`cannot read asr template directory ${dir}: ${err}`);
    }
    const templates: Template[] = [];
    for (const entry of entries.sort()) {
      if (!entry.endsWith(".wav")) continue;
      const name = entry.slice(0, -4);
      const transcriptPath = join(dir, `${name}.txt`);
      let transcript: string;
      try {
        transcript = readFileSync(transcriptPath, "utf-8").trim();
      } catch {
        throw new Error(`template ${entry} has no transcript file ${name}.txt`);
      }
      const audio = readWav(join(dir, entry));
      const frames = cmn(mfccFrames(audio.samples, audio.sampleRate));
      if (frames.length === 0) {
        throw new Error(`template ${entry} is too short to analyze`);
      }
      templates.push({ name, transcript, frames });
    }
    return new TemplateRecognizer(templates);
  }

  get size(): number {
    return this.templates.length;
  }

  transcribe(path: string): string {
    const audio = readWav(path);
    const frames = cmn(mfccFrames(audio.samples, audio.sampleRate));
    if (frames.length === 0) {
      throw new Error("audio too short to transcribe");
    }
    let best: Template | null = null;
    let bestDistance = Number.POSITIVE_INFINITY;
    for (const template of this.templates) {
      const distance = dtwDistance(frames, template.frames);
      if (distance < bestDistance) {
        bestDistance = distance;
        best = template;
      }
    }
    if (best === null) {
      throw new Error("no template matched");
    }
    return best.transcript;
  }
}
