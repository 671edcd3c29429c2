import { spawnSync } from "node:child_process";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

const ROOT = join(__dirname, "..");
const BINARY = join(ROOT, "dist", "src", "index.js");

function runSidecar(stdin: string, args: string[] = ["--asr-templates", "fixtures/templates"]) {
  return spawnSync("node", [BINARY, ...args], {
    cwd: ROOT,
    input: stdin,
    encoding: "utf-8",
    timeout: 60_000,
  });
}

describe("sidecar process", () => {
  it("serves requests and exits 0 on shutdown", () => {
    const lines = [
      JSON.stringify({
        id: 1,
        op: "asr",
        audio_path: "fixtures/audio/probe_greeting.wav",
        language: "en",
        params: {},
      }),
      JSON.stringify({ op: "shutdown" }),
    ].join("\n");
    const proc = runSidecar(lines + "\n");
    expect(proc.status).toBe(0);
    const replies = proc.stdout.split("\n").filter(Boolean).map((l) => JSON.parse(l));
    expect(replies).toEqual([{ id: 1, ok: true, result: "hello there friend" }]);
  });

  it("fails startup loudly when the template dir is missing", () => {
    const proc = runSidecar("", ["--asr-templates", "no/such/dir"]);
    expect(proc.status).not.toBe(0);
    expect(proc.stderr).toMatch(/startup failure/);
  });

  it("fails startup on unknown flags", () => {
    const proc = runSidecar("", ["--frobnicate"]);
    expect(proc.status).not.toBe(0);
  });

  it("replays the golden transcript byte-exactly", () => {
    const requests = readFileSync(join(ROOT, "golden", "requests.jsonl"), "utf-8");
    const expected = readFileSync(join(ROOT, "golden", "responses.jsonl"), "utf-8");
    const proc = runSidecar(requests);
    expect(proc.status).toBe(0);
    expect(proc.stdout).toBe(expected);
  });
});
