/** Session transport: one WebSocket with reconnect, plus the REST bits.
 *
 * Incoming text frames are parsed as JSON events and binary frames as
 * strand packets; anything malformed is reported through
 * onProtocolError and dropped, never thrown, so a hostile byte stream
 * cannot take the page down. The socket factory is injectable because
 * tests (and non-browser hosts) provide their own.
 */

import {
  decodeFrame, isServerEvent, MalformedFrame,
  type Command, type FrameData, type ServerEvent,
} from "./protocol.js";

export type SocketStatus = "connecting" | "open" | "closed";

/** The subset of WebSocket the client touches. */
export interface SocketLike {
  binaryType: string;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export interface SessionCallbacks {
  onEvent(ev: ServerEvent): void;
  onFrame(frame: FrameData): void;
  onStatus?(status: SocketStatus, detail?: string): void;
  onProtocolError?(kind: "bad_event_json" | "bad_frame", detail: string): void;
}

export interface SessionOptions {
  socketFactory?: (url: string) => SocketLike;
  backoffBaseMs?: number;
  backoffCapMs?: number;
  reconnect?: boolean;
  /** Injectable timer for tests; defaults to setTimeout. */
  schedule?: (fn: () => void, ms: number) => unknown;
}

function defaultFactory(url: string): SocketLike {
  const ctor = (globalThis as { WebSocket?: new (url: string) => SocketLike }).WebSocket;
  if (!ctor) {
    throw new Error("no WebSocket constructor available; pass socketFactory");
  }
  return new ctor(url);
}

export class SessionSocket {
  readonly url: string;
  private readonly cb: SessionCallbacks;
  private readonly factory: (url: string) => SocketLike;
  private readonly backoffBaseMs: number;
  private readonly backoffCapMs: number;
  private readonly reconnect: boolean;
  private readonly schedule: (fn: () => void, ms: number) => unknown;

  private socket: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private opened = false;

  constructor(url: string, cb: SessionCallbacks, opts: SessionOptions = {}) {
    this.url = url;
    this.cb = cb;
    this.factory = opts.socketFactory ?? defaultFactory;
    this.backoffBaseMs = opts.backoffBaseMs ?? 500;
    this.backoffCapMs = opts.backoffCapMs ?? 8000;
    this.reconnect = opts.reconnect ?? true;
    this.schedule = opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.open();
  }

  /** Delay before reconnect attempt n (0-based): doubled from the base,
   * capped. Exposed for tests. */
  backoffMs(attempt: number): number {
    return Math.min(this.backoffCapMs, this.backoffBaseMs * 2 ** attempt);
  }

  get isOpen(): boolean {
    return this.opened;
  }

  send(cmd: Command): boolean {
    if (!this.socket || !this.opened) return false;
    this.socket.send(JSON.stringify(cmd));
    return true;
  }

  close(): void {
    this.stopped = true;
    if (this.socket) this.socket.close();
    this.socket = null;
    this.opened = false;
  }

  private open(): void {
    if (this.stopped) return;
    this.cb.onStatus?.("connecting");
    let sock: SocketLike;
    try {
      sock = this.factory(this.url);
    } catch (err) {
      this.cb.onStatus?.("closed", String(err));
      this.scheduleReconnect();
      return;
    }
    this.socket = sock;
    sock.binaryType = "arraybuffer";
    sock.onopen = () => {
      this.opened = true;
      this.attempts = 0;
      this.cb.onStatus?.("open");
    };
    sock.onmessage = (ev) => this.dispatch(ev.data);
    sock.onerror = () => { /* onclose always follows */ };
    sock.onclose = () => {
      const wasOpen = this.opened;
      this.opened = false;
      this.socket = null;
      this.cb.onStatus?.("closed", wasOpen ? "connection lost" : "connect failed");
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped || !this.reconnect) return;
    const delay = this.backoffMs(this.attempts);
    this.attempts += 1;
    this.schedule(() => this.open(), delay);
  }

  private dispatch(data: unknown): void {
    if (typeof data === "string") {
      let parsed: unknown;
      try {
        parsed = JSON.parse(data);
      } catch {
        this.cb.onProtocolError?.("bad_event_json", "event frame is not JSON");
        return;
      }
      if (!isServerEvent(parsed)) {
        this.cb.onProtocolError?.("bad_event_json", "event frame has no event field");
        return;
      }
      this.cb.onEvent(parsed);
      return;
    }
    if (data instanceof ArrayBuffer) {
      try {
        this.cb.onFrame(decodeFrame(data));
      } catch (err) {
        const detail = err instanceof MalformedFrame ? err.message : String(err);
        this.cb.onProtocolError?.("bad_frame", detail);
      }
      return;
    }
    this.cb.onProtocolError?.("bad_frame", "unsupported message payload type");
  }
}

export interface StyleInfo {
  id: string;
  caption: string;
  strand_count: number;
  thumbnail: string;
}

export async function fetchStyles(httpBase: string): Promise<StyleInfo[]> {
  const res = await fetch(`${httpBase}/styles`);
  if (!res.ok) throw new Error(`styles request failed: ${res.status}`);
  return (await res.json()) as StyleInfo[];
}

export async function checkHealth(httpBase: string): Promise<boolean> {
  try {
    const res = await fetch(`${httpBase}/healthz`);
    return res.ok;
  } catch {
    return false;
  }
}
