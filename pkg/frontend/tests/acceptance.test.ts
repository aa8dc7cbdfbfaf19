// Acceptance gate for the session UI.  Each criterion prints one
// [PASS]/[FAIL] verdict line with the measured values, then asserts:
//   1. flicker fidelity   — 30 s of 10 Hz and 15 Hz at 60 fps, spectral peak
//                           within +/-0.2 Hz of target
//   2. marker transcript  — a full scripted session yields exactly 10
//                           stimulus pairs per task with strictly increasing
//                           timestamps
//   3. wire round-trip    — a headless protocol run feeds the live recorder
//                           over TCP and the persisted corpus slices back
//                           into 10 clean epochs per task

import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  FixedStepClock,
  NO_FLICKER,
  YES_FLICKER,
  dominantFrequencyHz,
  recordFlicker,
} from "../src/flicker.js";
import { TASK_ORDER } from "../src/markers.js";
import { runHeadlessSession } from "../src/headless.js";
import {
  DEFAULT_SCRIPT,
  ScriptedResponder,
  runProtocol,
  stimulusPairCounts,
} from "../src/protocol.js";
import { MarkerQueue } from "../src/transport.js";

const REPO_ROOT = fileURLToPath(new URL("../..", import.meta.url));

function verdict(ok: boolean, label: string, detail: string): void {
  process.stdout.write(`[${ok ? "PASS" : "FAIL"}] ${label}: ${detail}\n`);
  expect(ok, `${label}: ${detail}`).toBe(true);
}

/** Promise-per-line view of a child process stdout stream. */
function lineSource(stream: NodeJS.ReadableStream) {
  let buffer = "";
  const ready: string[] = [];
  const waiting: Array<{ resolve: (s: string) => void; reject: (e: Error) => void }> = [];
  let ended = false;
  stream.setEncoding("utf-8");
  stream.on("data", (chunk: string) => {
    buffer += chunk;
    let newline: number;
    while ((newline = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, newline);
      buffer = buffer.slice(newline + 1);
      const waiter = waiting.shift();
      if (waiter !== undefined) waiter.resolve(line);
      else ready.push(line);
    }
  });
  stream.on("end", () => {
    ended = true;
    while (waiting.length > 0) waiting.shift()!.reject(new Error("stream ended"));
  });
  return {
    next(timeoutMs = 30_000): Promise<string> {
      if (ready.length > 0) return Promise.resolve(ready.shift()!);
      if (ended) return Promise.reject(new Error("stream ended"));
      return new Promise((resolve, reject) => {
        const timer = setTimeout(
          () => reject(new Error(`timed out after ${timeoutMs} ms waiting for a line`)),
          timeoutMs,
        );
        waiting.push({
          resolve: (s) => {
            clearTimeout(timer);
            resolve(s);
          },
          reject: (e) => {
            clearTimeout(timer);
            reject(e);
          },
        });
      });
    },
  };
}

const SLICE_CHECK = `
import json, sys
from bcikit.epochs import slice_epochs
from bcikit.io import load_markers, load_recording

rec = load_recording(sys.argv[1])
log = load_markers(sys.argv[2])
out = {}
for task in log.tasks():
    epochs = slice_epochs(rec, log, task)
    out[task.value] = {
        "n_epochs": len(epochs.epochs),
        "shape": list(epochs.epochs[0].data.shape),
        "truths": [e.label.value for e in epochs.epochs],
    }
print(json.dumps(out))
`;

describe("session-ui acceptance", () => {
  it("flicker fidelity: 30 s at 60 fps peaks within 0.2 Hz of target", async () => {
    const details: string[] = [];
    let ok = true;
    for (const stimulus of [YES_FLICKER, NO_FLICKER]) {
      const trace = await recordFlicker(stimulus, new FixedStepClock(60), 30);
      const peak = dominantFrequencyHz(trace.luminance, 60);
      const err = Math.abs(peak - stimulus.frequencyHz);
      ok = ok && trace.luminance.length === 1800 && err <= 0.2;
      details.push(
        `${stimulus.frequencyHz} Hz -> peak ${peak.toFixed(4)} Hz over ` +
          `${trace.luminance.length} frames (|err| ${err.toFixed(4)} <= 0.2)`,
      );
    }
    verdict(ok, "flicker fidelity", details.join("; "));
  }, 30_000);

  it("marker transcript: 10 stimulus pairs per task, strictly increasing", async () => {
    const transcript = await runProtocol(
      DEFAULT_SCRIPT,
      new MarkerQueue(),
      new ScriptedResponder(),
    );
    const pairs = stimulusPairCounts(transcript);
    const allTen = TASK_ORDER.every((task) => pairs[task] === 10);
    const increasing = transcript.markers.every(
      (m, i) => i === 0 || m.t_sample > transcript.markers[i - 1].t_sample,
    );
    verdict(
      allTen && increasing,
      "marker transcript",
      `pairs per task [${TASK_ORDER.map((task) => pairs[task]).join(", ")}], ` +
        `strictly increasing over ${transcript.markers.length} markers=${increasing}`,
    );
  });

  it("wire round-trip: headless run feeds the recorder, corpus slices cleanly", async () => {
    const workDir = mkdtempSync(path.join(tmpdir(), "session-ui-"));
    const recPath = path.join(workDir, "session.bcirec");
    const markersPath = path.join(workDir, "session_markers.ndjson");
    // The default session timeline ends near sample 382k at 1 kHz, so a
    // 400 s synthetic source leaves headroom for every marker.
    const recorder = spawn(
      "python3",
      [
        "-m",
        "bcikit.cli",
        "record",
        "--synth-seconds",
        "400",
        "--timeout",
        "60",
        "--out-rec",
        recPath,
        "--out-markers",
        markersPath,
      ],
      { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    let recorderStderr = "";
    recorder.stderr!.setEncoding("utf-8");
    recorder.stderr!.on("data", (chunk: string) => {
      recorderStderr += chunk;
    });
    const lines = lineSource(recorder.stdout!);
    const exit = new Promise<number>((resolve) =>
      recorder.on("exit", (code) => resolve(code ?? -1)),
    );

    try {
      const hello = JSON.parse(await lines.next(60_000)) as {
        listening: string;
        port: number;
      };
      const { summary } = await runHeadlessSession({
        host: hello.listening,
        port: hello.port,
      });
      const tail = JSON.parse(await lines.next(60_000)) as { accepted_markers: number };
      const code = await exit;
      const wireOk =
        code === 0 &&
        summary.sent === 220 &&
        summary.accepted === 220 &&
        summary.rejected === 0 &&
        summary.pendingAtClose === 0 &&
        !summary.aborted &&
        tail.accepted_markers === 220;
      verdict(
        wireOk,
        "headless wire run",
        `recorder exit=${code}, sent=${summary.sent}, accepted=${summary.accepted}, ` +
          `rejected=${summary.rejected}, pending=${summary.pendingAtClose}, ` +
          `recorder log=${tail.accepted_markers}`,
      );

      const check = spawnSync("python3", ["-c", SLICE_CHECK, recPath, markersPath], {
        cwd: REPO_ROOT,
        encoding: "utf-8",
      });
      expect(check.status, check.stderr).toBe(0);
      const sliced = JSON.parse(check.stdout) as Record<
        string,
        { n_epochs: number; shape: number[]; truths: string[] }
      >;
      const slicesOk = TASK_ORDER.every((task) => {
        const entry = sliced[task];
        return (
          entry !== undefined &&
          entry.n_epochs === 10 &&
          entry.shape[0] === 16 &&
          entry.shape[1] === 5000 &&
          entry.truths.every((v, i) => v === (i % 2 === 0 ? "yes" : "no"))
        );
      });
      verdict(
        slicesOk,
        "slice_epochs round-trip",
        TASK_ORDER.map(
          (task) => `${task}=${sliced[task]?.n_epochs}x${sliced[task]?.shape?.join("x")}`,
        ).join(", "),
      );
    } catch (err) {
      recorder.kill();
      const message = err instanceof Error ? err.message : String(err);
      throw new Error(
        recorderStderr.length > 0
          ? `${message}; recorder stderr: ${recorderStderr}`
          : message,
      );
    } finally {
      rmSync(workDir, { recursive: true, force: true });
    }
  }, 180_000);
});
