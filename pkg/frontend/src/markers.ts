// Wire marker schema: one JSON object per line over the recorder's TCP
// stream, identical to the NDJSON sidecar format the analysis toolkit reads.

export type TaskName =
  | "eyes_open_closed"
  | "ssvep"
  | "motor_activity"
  | "motor_imagery"
  | "laryngeal_activity"
  | "laryngeal_imagery";

export type Truth = "yes" | "no";

export type PhaseName =
  | "prompt_shown"
  | "response_key"
  | "stimulus_start"
  | "stimulus_end";

/** Session task order is fixed by the protocol. */
export const TASK_ORDER: readonly TaskName[] = [
  "eyes_open_closed",
  "ssvep",
  "motor_activity",
  "motor_imagery",
  "laryngeal_activity",
  "laryngeal_imagery",
];

export interface WireMarker {
  /** Integer sample index on the shared sample clock (strictly increasing). */
  t_sample: number;
  task: TaskName;
  trial: number;
  truth: Truth;
  phase: PhaseName;
}

const PHASES: readonly PhaseName[] = [
  "prompt_shown",
  "response_key",
  "stimulus_start",
  "stimulus_end",
];

/** Cheap local mirror of the recorder's field validation, so malformed
 * markers fail in the UI instead of round-tripping as rejections. */
export function validateMarker(m: WireMarker): void {
  if (!Number.isInteger(m.t_sample) || m.t_sample < 0) {
    throw new Error(`t_sample must be a non-negative integer, got ${m.t_sample}`);
  }
  if (!TASK_ORDER.includes(m.task)) {
    throw new Error(`unknown task "${m.task}"`);
  }
  if (!Number.isInteger(m.trial) || m.trial < 0) {
    throw new Error(`trial must be a non-negative integer, got ${m.trial}`);
  }
  if (m.truth !== "yes" && m.truth !== "no") {
    throw new Error(`truth must be "yes" or "no", got "${m.truth}"`);
  }
  if (!PHASES.includes(m.phase)) {
    throw new Error(`unknown phase "${m.phase}"`);
  }
}

/** Stable field order so transcripts are diffable byte for byte. */
export function encodeMarker(m: WireMarker): string {
  return JSON.stringify({
    phase: m.phase,
    t_sample: m.t_sample,
    task: m.task,
    trial: m.trial,
    truth: m.truth,
  });
}
