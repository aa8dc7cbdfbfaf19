// Sine-mapped flicker squares for the SSVEP task: completely white at the
// sine peak, completely black in the trough, 10 Hz on the right (yes) and
// 15 Hz on the left (no).  Luminance is computed from the animation clock,
// never from frame counting, so a dropped frame distorts amplitude but not
// the flicker frequency.

import type { Truth } from "./markers.js";

export interface FlickerStimulus {
  frequencyHz: number;
  side: "left" | "right";
}

export const YES_FLICKER: FlickerStimulus = { frequencyHz: 10, side: "right" };
export const NO_FLICKER: FlickerStimulus = { frequencyHz: 15, side: "left" };

export function flickerForTruth(truth: Truth): FlickerStimulus {
  return truth === "yes" ? YES_FLICKER : NO_FLICKER;
}

/** luminance(t) = (1 + sin(2*pi*f*t)) / 2, in [0, 1]; 0.5 at t = 0. */
export function luminanceAt(stimulus: FlickerStimulus, tSeconds: number): number {
  return (1 + Math.sin(2 * Math.PI * stimulus.frequencyHz * tSeconds)) / 2;
}

/** Sample the stimulus at explicit frame timestamps (milliseconds on the
 * animation clock), one luminance value per frame. */
export function renderFlicker(
  stimulus: FlickerStimulus,
  frameTimesMs: readonly number[],
): number[] {
  return frameTimesMs.map((tMs) => luminanceAt(stimulus, tMs / 1000));
}

/** Delivers one callback per display frame with the animation-clock time in
 * milliseconds; `start` returns a stop function. */
export interface FrameClock {
  start(onFrame: (tMs: number) => void): () => void;
}

interface RafGlobals {
  requestAnimationFrame(callback: (tMs: number) => void): number;
  cancelAnimationFrame(handle: number): void;
}

/** requestAnimationFrame-backed clock for real browser rendering. */
export class RafClock implements FrameClock {
  start(onFrame: (tMs: number) => void): () => void {
    const g = globalThis as Partial<RafGlobals>;
    const raf = g.requestAnimationFrame;
    const caf = g.cancelAnimationFrame;
    if (raf === undefined || caf === undefined) {
      throw new Error("requestAnimationFrame unavailable; use FixedStepClock");
    }
    let handle = 0;
    let stopped = false;
    const tick = (tMs: number) => {
      if (stopped) return;
      onFrame(tMs);
      handle = raf(tick);
    };
    handle = raf(tick);
    return () => {
      stopped = true;
      caf(handle);
    };
  }
}

/** Deterministic clock for tests and headless runs: exact fps, no jitter.
 * Frames are delivered on a microtask so callers hold the stop function
 * before the first tick. */
export class FixedStepClock implements FrameClock {
  constructor(
    readonly fps: number,
    readonly maxFrames: number = Number.MAX_SAFE_INTEGER,
  ) {
    if (!(fps > 0)) throw new Error(`fps must be positive, got ${fps}`);
  }

  start(onFrame: (tMs: number) => void): () => void {
    let stopped = false;
    queueMicrotask(() => {
      for (let i = 0; !stopped && i < this.maxFrames; i++) {
        onFrame((i * 1000) / this.fps);
      }
    });
    return () => {
      stopped = true;
    };
  }
}

export interface FlickerTrace {
  timesMs: number[];
  luminance: number[];
}

/** Drive a stimulus off a frame clock for `seconds`, collecting the
 * per-frame luminance actually shown. */
export function recordFlicker(
  stimulus: FlickerStimulus,
  clock: FrameClock,
  seconds: number,
): Promise<FlickerTrace> {
  return new Promise((resolve) => {
    const trace: FlickerTrace = { timesMs: [], luminance: [] };
    const stop = clock.start((tMs) => {
      if (tMs >= seconds * 1000) {
        stop();
        resolve(trace);
        return;
      }
      trace.timesMs.push(tMs);
      trace.luminance.push(luminanceAt(stimulus, tMs / 1000));
    });
  });
}

/** Dominant frequency of a uniformly sampled luminance trace, by direct DFT
 * over the mean-removed sequence.  Used as a stimulus-fidelity self check. */
export function dominantFrequencyHz(samples: readonly number[], fps: number): number {
  const n = samples.length;
  if (n < 4) throw new Error(`need at least 4 samples, got ${n}`);
  const mean = samples.reduce((a, b) => a + b, 0) / n;
  let bestK = 1;
  let bestPower = -1;
  for (let k = 1; k <= Math.floor(n / 2); k++) {
    let re = 0;
    let im = 0;
    for (let i = 0; i < n; i++) {
      const angle = (-2 * Math.PI * k * i) / n;
      const x = samples[i] - mean;
      re += x * Math.cos(angle);
      im += x * Math.sin(angle);
    }
    const power = re * re + im * im;
    if (power > bestPower) {
      bestPower = power;
      bestK = k;
    }
  }
  return (bestK * fps) / n;
}
