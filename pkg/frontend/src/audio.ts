// Audio cues for the eyes open/closed task: a lower-pitched tone asks the
// participant to close their eyes, a higher-pitched tone to open them.
// The protocol only fixes low-vs-high; the exact pitches (440/880 Hz) and
// cue length are UI defaults.

import type { Truth } from "./markers.js";

export interface ToneCue {
  frequencyHz: number;
  durationSeconds: number;
  gain: number;
}

export const CLOSE_EYES_CUE: ToneCue = {
  frequencyHz: 440,
  durationSeconds: 0.3,
  gain: 0.8,
};

export const OPEN_EYES_CUE: ToneCue = {
  frequencyHz: 880,
  durationSeconds: 0.3,
  gain: 0.8,
};

/** Eyes-closed counts as "yes", so yes maps to the low close-eyes tone. */
export function cueForEyesTruth(truth: Truth): ToneCue {
  return truth === "yes" ? CLOSE_EYES_CUE : OPEN_EYES_CUE;
}

/** PCM sine samples for the cue, ready for an AudioBuffer channel. */
export function toneSamples(cue: ToneCue, sampleRateHz = 44100): Float32Array {
  const n = Math.round(cue.durationSeconds * sampleRateHz);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = cue.gain * Math.sin((2 * Math.PI * cue.frequencyHz * i) / sampleRateHz);
  }
  return out;
}
