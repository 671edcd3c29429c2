/**
 * Minimal RIFF/WAVE reader and writer.
 *
 * Reads PCM16 and IEEE-float files (mono or stereo, stereo averaged down to
 * mono); writes PCM16 mono. Strict about malformed files so a bad input
 * becomes an error message instead of garbage samples.
 */

import { readFileSync, writeFileSync } from "node:fs";

export interface Audio {
  samples: Float64Array;
  sampleRate: number;
}

const FORMAT_PCM = 1;
const FORMAT_FLOAT = 3;
const FORMAT_EXTENSIBLE = 0xfffe;

export function readWav(path: string): Audio {
  const data = readFileSync(path);
  if (data.length < 12 || data.toString("ascii", 0, 4) !== "RIFF" || data.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let formatTag = -1;
  let channels = 0;
  let sampleRate = 0;
  let bits = 0;
  let payload: Buffer | null = null;

  let pos = 12;
  while (pos + 8 <= data.length) {
    const chunkId = data.toString("ascii", pos, pos + 4);
    const size = data.readUInt32LE(pos + 4);
    const body = data.subarray(pos + 8, pos + 8 + size);
    if (body.length < size) {
      throw new Error(`${path}: truncated ${chunkId} chunk`);
    }
    if (chunkId === "fmt ") {
      formatTag = body.readUInt16LE(0);
      channels = body.readUInt16LE(2);
      sampleRate = body.readUInt32LE(4);
      bits = body.readUInt16LE(14);
      if (formatTag === FORMAT_EXTENSIBLE) {
        if (body.length < 26) throw new Error(`${path}: truncated extensible fmt chunk`);
        formatTag = body.readUInt16LE(24);
      }
    } else if (chunkId === "data") {
      payload = body;
    }
    pos += 8 + size + (size % 2);
  }
  if (formatTag < 0) throw new Error(`${path}: missing fmt chunk`);
  if (payload === null) throw new Error(`${path}: missing data chunk`);
  if (channels !== 1 && channels !== 2) {
    throw new Error(`${path}: unsupported channel count ${channels}`);
  }

  let raw: Float64Array;
  if (formatTag === FORMAT_PCM && bits === 16) {
    const n = payload.length >> 1;
    raw = new Float64Array(n);
    for (let i = 0; i < n; i++) raw[i] = payload.readInt16LE(2 * i) / 32768;
  } else if (formatTag === FORMAT_FLOAT && bits === 32) {
    const n = payload.length >> 2;
    raw = new Float64Array(n);
    for (let i = 0; i < n; i++) raw[i] = payload.readFloatLE(4 * i);
  } else if (formatTag === FORMAT_FLOAT && bits === 64) {
    const n = payload.length >> 3;
    raw = new Float64Array(n);
    for (let i = 0; i < n; i++) raw[i] = payload.readDoubleLE(8 * i);
  } else {
    throw new Error(`${path}: unsupported codec (format tag ${formatTag}, ${bits} bits)`);
  }

  let samples: Float64Array;
  if (channels === 2) {
    samples = new Float64Array(raw.length >> 1);
    for (let i = 0; i < samples.length; i++) samples[i] = (raw[2 * i] + raw[2 * i + 1]) / 2;
  } else {
    samples = raw;
  }
  for (let i = 0; i < samples.length; i++) {
    samples[i] = Math.min(1, Math.max(-1, samples[i]));
  }
  return { samples, sampleRate };
}

export function writeWav(path: string, audio: Audio): void {
  const { samples, sampleRate } = audio;
  const payload = Buffer.alloc(samples.length * 2);
  for (let i = 0; i < samples.length; i++) {
    const clipped = Math.min(1, Math.max(-1, samples[i]));
    const value = Math.min(32767, Math.max(-32768, Math.round(clipped * 32768)));
    payload.writeInt16LE(value, 2 * i);
  }
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + payload.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(FORMAT_PCM, 20);
  header.writeUInt16LE(1, 22);
  header.writeUInt32LE(sampleRate, 24);
  header.writeUInt32LE(sampleRate * 2, 28);
  header.writeUInt16LE(2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(payload.length, 40);
  writeFileSync(path, Buffer.concat([header, payload]));
}
