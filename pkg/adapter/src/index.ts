/**
 * Reference adapter sidecar.
 *
 * Speaks the dubpair adapter protocol on stdin/stdout: `asr` via a DTW
 * template recognizer, `embed` via mel-cepstral statistics, `denoise` via
 * spectral subtraction. Model assets are supplied on the command line;
 * diagnostics go to stderr so stdout stays protocol-clean.
 *
 * Usage: node dist/src/index.js --asr-templates <dir>
 */

import { TemplateRecognizer } from "./asr.js";
import { denoiseFile } from "./denoise.js";
import { embedAudio } from "./embed.js";
import { serve } from "./protocol.js";
import { readWav } from "./wav.js";

function parseArgs(argv: string[]): { asrTemplates: string | null } {
  let asrTemplates: string | null = null;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--asr-templates") {
      asrTemplates = argv[i + 1] ?? null;
      i++;
    } else {
      throw new Error(`unknown flag ${argv[i]}`);
    }
  }
  return { asrTemplates };
}

async function main(): Promise<number> {
  let recognizer: TemplateRecognizer | null = null;
  try {
    const args = parseArgs(process.argv.slice(2));
    if (!args.asrTemplates) {
      throw new Error("missing required flag --asr-templates <dir>");
    }
    recognizer = TemplateRecognizer.load(args.asrTemplates);
    process.stderr.write(
      `dubpair-adapter: loaded ${recognizer.size} asr templates from ${args.asrTemplates}\n`,
    );
  } catch (err) {
    process.stderr.write(`dubpair-adapter: startup failure: ${err}\n`);
    return 1;
  }

  await serve(process.stdin, process.stdout, {
    asr: (audioPath) => recognizer!.transcribe(audioPath),
    embed: (audioPath) => embedAudio(readWav(audioPath)),
    denoise: (audioPath) => denoiseFile(audioPath),
  });
  return 0;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    process.stderr.write(`dubpair-adapter: fatal: ${err}\n`);
    process.exit(1);
  },
);
