// Marker transport: an ordered, buffered queue in front of a line-oriented
// request/response channel.  The UI thread pushes markers and never blocks;
// a single background drain sends them strictly in order, one in flight at
// a time.  Losing the endpoint keeps the buffer (timestamps stay monotonic
// because they are fixed at enqueue time); reconnecting flushes the backlog.

import net from "node:net";

import { encodeMarker, validateMarker, type WireMarker } from "./markers.js";

/** One line out, one JSON response line back. */
export interface LineChannel {
  send(line: string): Promise<string>;
  close(): Promise<void>;
}

export interface RecorderResponse {
  ok: boolean;
  accepted?: number;
  error?: string;
  message?: string;
}

export interface Rejection {
  marker: WireMarker;
  response: RecorderResponse;
}

export class MarkerQueue {
  private channel: LineChannel | null;
  private pending: WireMarker[] = [];
  private lastSample = -1;
  private chain: Promise<void> = Promise.resolve();

  readonly accepted: WireMarker[] = [];
  readonly rejections: Rejection[] = [];
  /** Called once per lost endpoint; the queue keeps buffering afterwards. */
  onTransportError?: (err: unknown) => void;

  constructor(channel: LineChannel | null = null) {
    this.channel = channel;
  }

  /** Enqueue a marker, bumping its timestamp past the previous one when the
   * protocol timeline produces a tie (e.g. back-to-back eyes blocks), so the
   * stream stays strictly increasing.  Returns the marker actually queued. */
  push(marker: WireMarker): WireMarker {
    validateMarker(marker);
    const t = marker.t_sample <= this.lastSample ? this.lastSample + 1 : marker.t_sample;
    this.lastSample = t;
    const queued: WireMarker = { ...marker, t_sample: t };
    this.pending.push(queued);
    void this.flush();
    return queued;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  get connected(): boolean {
    return this.channel !== null;
  }

  /** Attach (or replace) the channel and flush the backlog in order. */
  async connect(channel: LineChannel): Promise<void> {
    this.channel = channel;
    await this.flush();
  }

  /** Drain everything currently pending over the current channel.  Resolves
   * once the queue is empty or the endpoint is lost. */
  flush(): Promise<void> {
    this.chain = this.chain.then(() => this.drain());
    return this.chain;
  }

  private async drain(): Promise<void> {
    while (this.channel !== null && this.pending.length > 0) {
      const marker = this.pending[0];
      let line: string;
      try {
        line = await this.channel.send(encodeMarker(marker));
      } catch (err) {
        // Endpoint lost mid-send: the marker stays queued and is re-sent on
        // reconnect (at-least-once; a delivered duplicate surfaces as an
        // out_of_order rejection, never as silent loss).
        this.channel = null;
        this.onTransportError?.(err);
        return;
      }
      this.pending.shift();
      const response = JSON.parse(line) as RecorderResponse;
      if (response.ok) {
        this.accepted.push(marker);
      } else {
        this.rejections.push({ marker, response });
      }
    }
  }

  /** Flush and close the channel (the recorder finalizes its log on EOF). */
  async close(): Promise<void> {
    await this.flush();
    const channel = this.channel;
    this.channel = null;
    if (channel !== null) await channel.close();
  }
}

/** TCP implementation of LineChannel speaking the recorder's protocol:
 * newline-delimited JSON both ways, exactly one response line per request. */
export class TcpLineChannel implements LineChannel {
  private buffer = "";
  private waiters: Array<{
    resolve: (line: string) => void;
    reject: (err: Error) => void;
  }> = [];
  private closed = false;

  private constructor(private readonly socket: net.Socket) {
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      this.buffer += chunk;
      let newline: number;
      while ((newline = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, newline);
        this.buffer = this.buffer.slice(newline + 1);
        this.waiters.shift()?.resolve(line);
      }
    });
    const fail = (err: Error) => {
      this.closed = true;
      while (this.waiters.length > 0) this.waiters.shift()!.reject(err);
    };
    socket.on("error", fail);
    socket.on("close", () => fail(new Error("connection closed")));
  }

  static connect(host: string, port: number, timeoutMs = 5000): Promise<TcpLineChannel> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new TcpLineChannel(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  send(line: string): Promise<string> {
    if (this.closed) return Promise.reject(new Error("channel closed"));
    return new Promise((resolve, reject) => {
      this.waiters.push({ resolve, reject });
      this.socket.write(line + "\n", (err) => {
        if (err) reject(err);
      });
    });
  }

  close(): Promise<void> {
    if (this.closed) return Promise.resolve();
    this.closed = true;
    return new Promise((resolve) => this.socket.end(() => resolve()));
  }
}
