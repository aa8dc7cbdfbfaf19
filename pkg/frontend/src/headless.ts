// Headless session driver: runs the full protocol against a live recorder
// over TCP, with a scripted participant instead of a human.  Used for
// end-to-end checks of the wire path and for generating real corpora from
// the UI's own timeline.

import { parseArgs } from "node:util";
import { readFileSync } from "node:fs";

import {
  DEFAULT_SCRIPT,
  resolveScript,
  runProtocol,
  scriptFromJson,
  scriptFromQuery,
  stimulusPairCounts,
  ScriptedResponder,
  type ProtocolScript,
  type Responder,
  type SessionTranscript,
} from "./protocol.js";
import { MarkerQueue, TcpLineChannel } from "./transport.js";
import type { TaskName } from "./markers.js";

export interface HeadlessOptions {
  host: string;
  port: number;
  script?: ProtocolScript;
  responder?: Responder;
}

export interface HeadlessSummary {
  sent: number;
  accepted: number;
  rejected: number;
  pendingAtClose: number;
  aborted: boolean;
  durationSamples: number;
  stimulusPairs: Record<TaskName, number>;
}

export interface HeadlessResult {
  transcript: SessionTranscript;
  summary: HeadlessSummary;
}

export async function runHeadlessSession(
  options: HeadlessOptions,
): Promise<HeadlessResult> {
  const script = options.script ?? DEFAULT_SCRIPT;
  const responder = options.responder ?? new ScriptedResponder();
  const channel = await TcpLineChannel.connect(options.host, options.port);
  const queue = new MarkerQueue();
  queue.connect(channel);
  let transcript: SessionTranscript;
  try {
    transcript = await runProtocol(script, queue, responder);
  } finally {
    await queue.close();
  }
  const summary: HeadlessSummary = {
    sent: transcript.markers.length,
    accepted: queue.accepted.length,
    rejected: queue.rejections.length,
    pendingAtClose: queue.pendingCount,
    aborted: transcript.aborted,
    durationSamples: transcript.durationSamples,
    stimulusPairs: stimulusPairCounts(transcript),
  };
  return { transcript, summary };
}

export async function main(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      host: { type: "string", default: "127.0.0.1" },
      port: { type: "string" },
      config: { type: "string" },
      query: { type: "string" },
    },
  });
  if (values.port === undefined) {
    process.stderr.write("usage: headless --port <port> [--host h] [--config file.json | --query q]\n");
    return 2;
  }
  if (values.config !== undefined && values.query !== undefined) {
    process.stderr.write("pass at most one of --config / --query\n");
    return 2;
  }
  let script: ProtocolScript;
  if (values.config !== undefined) {
    script = scriptFromJson(readFileSync(values.config, "utf-8"));
  } else if (values.query !== undefined) {
    script = scriptFromQuery(values.query);
  } else {
    script = resolveScript();
  }
  const { summary } = await runHeadlessSession({
    host: values.host!,
    port: Number(values.port),
    script,
  });
  process.stdout.write(JSON.stringify(summary) + "\n");
  return summary.rejected === 0 && summary.pendingAtClose === 0 ? 0 : 1;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      process.stderr.write(`${err instanceof Error ? err.message : String(err)}\n`);
      process.exit(1);
    },
  );
}
