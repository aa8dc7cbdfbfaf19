export {
  TASK_ORDER,
  encodeMarker,
  validateMarker,
  type PhaseName,
  type TaskName,
  type Truth,
  type WireMarker,
} from "./markers.js";
export {
  FixedStepClock,
  NO_FLICKER,
  RafClock,
  YES_FLICKER,
  dominantFrequencyHz,
  flickerForTruth,
  luminanceAt,
  recordFlicker,
  renderFlicker,
  type FlickerStimulus,
  type FlickerTrace,
  type FrameClock,
} from "./flicker.js";
export {
  CLOSE_EYES_CUE,
  OPEN_EYES_CUE,
  cueForEyesTruth,
  toneSamples,
  type ToneCue,
} from "./audio.js";
export {
  MarkerQueue,
  TcpLineChannel,
  type LineChannel,
  type RecorderResponse,
  type Rejection,
} from "./transport.js";
export {
  DEFAULT_SCRIPT,
  ScriptedResponder,
  expectedKey,
  resolveScript,
  runProtocol,
  scriptFromJson,
  scriptFromQuery,
  stimulusPairCounts,
  type Key,
  type KeyPress,
  type ProtocolScript,
  type Responder,
  type Retry,
  type SessionTranscript,
} from "./protocol.js";
export {
  runHeadlessSession,
  type HeadlessOptions,
  type HeadlessResult,
  type HeadlessSummary,
} from "./headless.js";
