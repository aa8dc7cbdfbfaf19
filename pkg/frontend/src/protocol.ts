// Protocol state machine for one recording session.
//
// Six tasks in a fixed order, ten trials each.  The eyes task alternates
// closed/open five-second blocks announced by tone cues.  Every other task
// shows an elephant either inside or outside a box; the participant answers
// with the right arrow (yes: elephant in the box) or the left arrow (no).
// A wrong key shows a warning and re-shows the exact same configuration
// without advancing the trial; the "x" key aborts the session at any time.
// Every emitted marker flows through an ordered MarkerQueue on a shared
// sample clock.

import { cueForEyesTruth } from "./audio.js";
import { flickerForTruth, type FlickerStimulus } from "./flicker.js";
import {
  TASK_ORDER,
  type PhaseName,
  type TaskName,
  type Truth,
  type WireMarker,
} from "./markers.js";
import type { MarkerQueue } from "./transport.js";

export interface ProtocolScript {
  tasks: readonly TaskName[];
  trialsPerTask: number;
  stimulusSeconds: number;
  /** Shared sample clock rate; must match the recorder's source. */
  rateHz: number;
  /** Quiet lead-in before the first trial. */
  leadInSeconds: number;
  /** Prompt-to-stimulus delay on cued tasks. */
  promptLeadSeconds: number;
  /** How long the wrong-key warning stays up before the re-show. */
  warningSeconds: number;
  interTrialSeconds: number;
  interTaskSeconds: number;
  /** Per-task elephant configurations; defaults to alternating yes/no. */
  truths?: Partial<Record<TaskName, Truth[]>>;
}

export const DEFAULT_SCRIPT: ProtocolScript = {
  tasks: TASK_ORDER,
  trialsPerTask: 10,
  stimulusSeconds: 5,
  rateHz: 1000,
  leadInSeconds: 2,
  promptLeadSeconds: 1,
  warningSeconds: 1,
  interTrialSeconds: 0.5,
  interTaskSeconds: 1,
};

const POSITIVE_FIELDS = [
  "trialsPerTask",
  "stimulusSeconds",
  "rateHz",
] as const;

const NON_NEGATIVE_FIELDS = [
  "leadInSeconds",
  "promptLeadSeconds",
  "warningSeconds",
  "interTrialSeconds",
  "interTaskSeconds",
] as const;

export function resolveScript(overrides: Partial<ProtocolScript> = {}): ProtocolScript {
  const script: ProtocolScript = { ...DEFAULT_SCRIPT, ...overrides };
  for (const task of script.tasks) {
    if (!TASK_ORDER.includes(task)) throw new Error(`unknown task "${task}"`);
  }
  const canonical = TASK_ORDER.filter((t) => script.tasks.includes(t));
  if (script.tasks.length !== canonical.length ||
      script.tasks.some((t, i) => t !== canonical[i])) {
    throw new Error("tasks must follow the fixed session order");
  }
  for (const field of POSITIVE_FIELDS) {
    if (!(script[field] > 0)) throw new Error(`${field} must be positive`);
  }
  for (const field of NON_NEGATIVE_FIELDS) {
    if (!(script[field] >= 0)) throw new Error(`${field} must be non-negative`);
  }
  if (script.truths !== undefined) {
    for (const [task, seq] of Object.entries(script.truths)) {
      if (seq.length < script.trialsPerTask) {
        throw new Error(
          `truths for ${task} has ${seq.length} entries, needs ${script.trialsPerTask}`,
        );
      }
      if (seq.some((v) => v !== "yes" && v !== "no")) {
        throw new Error(`truths for ${task} must be "yes"/"no"`);
      }
    }
  }
  return script;
}

/** JSON file form of the script (partial overrides, snake_case keys). */
export function scriptFromJson(text: string): ProtocolScript {
  const raw = JSON.parse(text);
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error("script JSON must be an object");
  }
  return resolveScript(snakeScriptToOverrides(raw as Record<string, unknown>));
}

/** URL query form, e.g. "tasks=ssvep,motor_imagery&trials_per_task=4". */
export function scriptFromQuery(query: string): ProtocolScript {
  const params = new URLSearchParams(query);
  const raw: Record<string, unknown> = {};
  for (const [key, value] of params) {
    raw[key] = key === "tasks" ? value.split(",").filter((s) => s.length > 0) : Number(value);
  }
  return resolveScript(snakeScriptToOverrides(raw));
}

const SNAKE_KEYS: Record<string, keyof ProtocolScript> = {
  tasks: "tasks",
  trials_per_task: "trialsPerTask",
  stimulus_seconds: "stimulusSeconds",
  rate_hz: "rateHz",
  lead_in_seconds: "leadInSeconds",
  prompt_lead_seconds: "promptLeadSeconds",
  warning_seconds: "warningSeconds",
  inter_trial_seconds: "interTrialSeconds",
  inter_task_seconds: "interTaskSeconds",
  truths: "truths",
};

function snakeScriptToOverrides(raw: Record<string, unknown>): Partial<ProtocolScript> {
  const overrides: Record<string, unknown> = {};
  for (const [key, value] of Object.entries(raw)) {
    const mapped = SNAKE_KEYS[key];
    if (mapped === undefined) throw new Error(`unknown script field "${key}"`);
    overrides[mapped] = value;
  }
  return overrides as Partial<ProtocolScript>;
}

export type Key = "left" | "right" | "x";

export interface KeyPress {
  key: Key;
  /** Reaction time from prompt (or cue) to the key, in seconds. */
  latencySeconds: number;
}

/** Supplies the participant's key presses.  `attempt` counts re-shows of the
 * same configuration (0 on the first presentation). */
export interface Responder {
  respond(task: TaskName, trial: number, truth: Truth, attempt: number): KeyPress;
}

export function expectedKey(truth: Truth): Key {
  return truth === "yes" ? "right" : "left";
}

export interface ScriptedResponderOptions {
  latencySeconds?: number;
  /** Press the wrong key on the first attempt of these (task, trial) pairs. */
  wrongFirst?: ReadonlyArray<readonly [TaskName, number]>;
  /** Press "x" when this (task, trial) prompt appears. */
  abortAt?: readonly [TaskName, number];
}

/** Deterministic participant for headless runs and tests: answers correctly
 * after a fixed reaction time, with optional scripted mistakes or an abort. */
export class ScriptedResponder implements Responder {
  constructor(private readonly options: ScriptedResponderOptions = {}) {}

  respond(task: TaskName, trial: number, truth: Truth, attempt: number): KeyPress {
    const latencySeconds = this.options.latencySeconds ?? 0.4;
    const abortAt = this.options.abortAt;
    if (abortAt !== undefined && abortAt[0] === task && abortAt[1] === trial) {
      return { key: "x", latencySeconds };
    }
    const wrong = (this.options.wrongFirst ?? []).some(
      ([t, i]) => t === task && i === trial,
    );
    if (wrong && attempt === 0) {
      const wrongKey = expectedKey(truth) === "right" ? "left" : "right";
      return { key: wrongKey, latencySeconds };
    }
    return { key: expectedKey(truth), latencySeconds };
  }
}

export interface Retry {
  task: TaskName;
  trial: number;
  pressed: Key;
}

export interface SessionTranscript {
  /** Markers emitted to the queue, in order, with their final timestamps. */
  markers: WireMarker[];
  /** Wrong-key presses; each one re-shows the same configuration. */
  retries: Retry[];
  /** Tone cue pitches played for the eyes task, in block order. */
  cuesPlayedHz: number[];
  /** Flicker squares attended per SSVEP trial. */
  flickerStimuli: Array<{ trial: number } & FlickerStimulus>;
  aborted: boolean;
  /** Sample time of the abort key press (transcript event only; the four-
   * phase wire schema has no abort phase, the stream just ends). */
  abortAtSample: number | null;
  durationSamples: number;
}

function defaultTruths(trials: number): Truth[] {
  // Alternating, starting closed/yes: balanced for even trial counts and
  // identical to the convention the analysis side expects for eyes blocks.
  return Array.from({ length: trials }, (_, i) => (i % 2 === 0 ? "yes" : "no"));
}

function truthSequence(script: ProtocolScript, task: TaskName): Truth[] {
  const configured = script.truths?.[task];
  if (configured !== undefined) return configured.slice(0, script.trialsPerTask);
  return defaultTruths(script.trialsPerTask);
}

/** Run the whole session, emitting markers through `queue`.  The timeline is
 * a deterministic function of (script, responder latencies); wall-clock
 * pacing is the caller's concern (headless runs do not sleep). */
export async function runProtocol(
  script: ProtocolScript,
  queue: MarkerQueue,
  responder: Responder,
): Promise<SessionTranscript> {
  const s = resolveScript(script);
  const transcript: SessionTranscript = {
    markers: [],
    retries: [],
    cuesPlayedHz: [],
    flickerStimuli: [],
    aborted: false,
    abortAtSample: null,
    durationSamples: 0,
  };
  const toSample = (tSeconds: number) => Math.round(tSeconds * s.rateHz);
  const emit = (
    tSeconds: number,
    task: TaskName,
    trial: number,
    truth: Truth,
    phase: PhaseName,
  ) => {
    const queued = queue.push({ t_sample: toSample(tSeconds), task, trial, truth, phase });
    transcript.markers.push(queued);
  };

  let cursor = s.leadInSeconds;
  session: for (const task of s.tasks) {
    const truths = truthSequence(s, task);
    if (task === "eyes_open_closed") {
      // Contiguous five-second blocks, each announced by its tone cue.
      for (let trial = 0; trial < s.trialsPerTask; trial++) {
        const truth = truths[trial];
        transcript.cuesPlayedHz.push(cueForEyesTruth(truth).frequencyHz);
        emit(cursor, task, trial, truth, "stimulus_start");
        cursor += s.stimulusSeconds;
        emit(cursor, task, trial, truth, "stimulus_end");
      }
    } else {
      for (let trial = 0; trial < s.trialsPerTask; trial++) {
        const truth = truths[trial];
        let acceptedLatency = 0;
        for (let attempt = 0; ; attempt++) {
          emit(cursor, task, trial, truth, "prompt_shown");
          const press = responder.respond(task, trial, truth, attempt);
          const latency = Math.max(press.latencySeconds, 1 / s.rateHz);
          if (press.key === "x") {
            transcript.aborted = true;
            transcript.abortAtSample = toSample(cursor + latency);
            break session;
          }
          if (press.key === expectedKey(truth)) {
            emit(cursor + latency, task, trial, truth, "response_key");
            acceptedLatency = latency;
            break;
          }
          // Warning, then the same elephant/box configuration again.
          transcript.retries.push({ task, trial, pressed: press.key });
          cursor += latency + s.warningSeconds;
        }
        const start = cursor + Math.max(s.promptLeadSeconds, acceptedLatency + 0.05);
        if (task === "ssvep") {
          transcript.flickerStimuli.push({ trial, ...flickerForTruth(truth) });
        }
        emit(start, task, trial, truth, "stimulus_start");
        emit(start + s.stimulusSeconds, task, trial, truth, "stimulus_end");
        cursor = start + s.stimulusSeconds + s.interTrialSeconds;
      }
    }
    cursor += s.interTaskSeconds;
  }

  transcript.durationSamples = toSample(cursor);
  await queue.flush();
  return transcript;
}

/** Stimulus start/end pair count per task in a transcript. */
export function stimulusPairCounts(
  transcript: SessionTranscript,
): Record<TaskName, number> {
  const counts = Object.fromEntries(TASK_ORDER.map((t) => [t, 0])) as Record<
    TaskName,
    number
  >;
  const open = new Map<TaskName, number>();
  for (const marker of transcript.markers) {
    if (marker.phase === "stimulus_start") {
      open.set(marker.task, (open.get(marker.task) ?? 0) + 1);
    } else if (marker.phase === "stimulus_end") {
      const pendingStarts = open.get(marker.task) ?? 0;
      if (pendingStarts < 1) throw new Error(`stimulus_end without start in ${marker.task}`);
      open.set(marker.task, pendingStarts - 1);
      counts[marker.task] += 1;
    }
  }
  return counts;
}
