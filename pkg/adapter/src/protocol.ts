/**
 * JSON-lines request/response loop over a pair of streams.
 *
 * One request object per line on the input stream produces exactly one
 * response line with a matching id on the output stream. A malformed line
 * yields an ok=false response (id -1 when none could be parsed) and the
 * loop continues; an `{"op":"shutdown"}` message ends the loop cleanly.
 */

import { createInterface } from "node:readline";
import type { Readable, Writable } from "node:stream";

export interface AdapterRequest {
  id: number;
  op: string;
  audio_path: string;
  language?: string | null;
  params?: Record<string, string>;
}

export interface AdapterResponse {
  id: number;
  ok: boolean;
  result?: string | number[];
  error?: string;
}

export interface Handlers {
  asr?: (audioPath: string, language: string | null) => string;
  embed?: (audioPath: string) => number[];
  denoise?: (audioPath: string) => string;
}

function parseRequest(line: string): AdapterRequest | { malformed: string; id: number } {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (err) {
    return { malformed: `parse error: ${err}`, id: -1 };
  }
  if (typeof obj !== "object" || obj === null) {
    return { malformed: "request must be a JSON object", id: -1 };
  }
  const record = obj as Record<string, unknown>;
  const id = typeof record.id === "number" ? record.id : -1;
  if (record.op === "shutdown") {
    return { id, op: "shutdown", audio_path: "" };
  }
  if (typeof record.op !== "string") {
    return { malformed: "missing op", id };
  }
  if (typeof record.audio_path !== "string") {
    return { malformed: "missing audio_path", id };
  }
  return {
    id,
    op: record.op,
    audio_path: record.audio_path,
    language: typeof record.language === "string" ? record.language : null,
    params: (record.params as Record<string, string>) ?? {},
  };
}

export function serve(input: Readable, output: Writable, handlers: Handlers): Promise<void> {
  const send = (response: AdapterResponse) => {
    output.write(JSON.stringify(response) + "\n");
  };

  return new Promise((resolve) => {
    const lines = createInterface({ input, terminal: false });
    lines.on("line", (line) => {
      if (!line.trim()) return;
      const request = parseRequest(line);
      if ("malformed" in request) {
        send({ id: request.id, ok: false, error: request.malformed });
        return;
      }
      if (request.op === "shutdown") {
        lines.close();
        resolve();
        return;
      }
      const handler = handlers[request.op as keyof Handlers];
      if (!handler) {
        send({ id: request.id, ok: false, error: `unknown op ${request.op}` });
        return;
      }
      try {
        const result =
          request.op === "asr"
            ? (handler as NonNullable<Handlers["asr"]>)(
                request.audio_path,
                request.language ?? null,
              )
            : (handler as (p: string) => string | number[])(request.audio_path);
        send({ id: request.id, ok: true, result });
      } catch (err) {
        send({ id: request.id, ok: false, error: String(err instanceof Error ? err.message : err) });
      }
    });
    lines.on("close", () => resolve());
  });
}
