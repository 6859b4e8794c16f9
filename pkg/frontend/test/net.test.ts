import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { SessionSocket, type SocketLike } from "../src/net.js";
import { setStride, type FrameData, type ServerEvent } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  binaryType = "blob";
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }
}

function validPacket(): ArrayBuffer {
  const buf = new ArrayBuffer(12 + 4 + 12);
  const view = new DataView(buf);
  [0x48, 0x46, 0x52, 0x4d].forEach((b, i) => view.setUint8(i, b));
  view.setUint32(4, 3, true);
  view.setUint32(8, 1, true);
  view.setUint32(12, 1, true);
  view.setFloat32(16, 1.5, true);
  view.setFloat32(20, 2.5, true);
  view.setFloat32(24, 3.5, true);
  return buf;
}

describe("SessionSocket", () => {
  let sockets: FakeSocket[];
  let events: ServerEvent[];
  let frames: FrameData[];
  let protocolErrors: string[];
  let statuses: string[];

  const factory = (): FakeSocket => {
    const s = new FakeSocket();
    sockets.push(s);
    return s;
  };

  function connect(opts: { reconnect?: boolean } = {}): SessionSocket {
    return new SessionSocket("ws://test/ws", {
      onEvent: (ev) => events.push(ev),
      onFrame: (fd) => frames.push(fd),
      onStatus: (st) => statuses.push(st),
      onProtocolError: (kind) => protocolErrors.push(kind),
    }, { socketFactory: factory, ...opts });
  }

  beforeEach(() => {
    sockets = [];
    events = [];
    frames = [];
    protocolErrors = [];
    statuses = [];
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("requests binary frames as ArrayBuffers", () => {
    connect().close();
    expect(sockets[0]!.binaryType).toBe("arraybuffer");
  });

  it("dispatches events and frames", () => {
    const session = connect();
    const sock = sockets[0]!;
    sock.onopen!();
    sock.onmessage!({ data: JSON.stringify({ event: "ack", command: "set_stride" }) });
    sock.onmessage!({ data: validPacket() });
    expect(events).toEqual([{ event: "ack", command: "set_stride" }]);
    expect(frames.length).toBe(1);
    expect(frames[0]!.frameId).toBe(3);
    expect(frames[0]!.vertexTotal).toBe(1);
    session.close();
  });

  it("drops malformed input without dying", () => {
    const session = connect();
    const sock = sockets[0]!;
    sock.onopen!();
    sock.onmessage!({ data: "{not json" });
    sock.onmessage!({ data: "42" });
    sock.onmessage!({ data: new Uint8Array([1, 2, 3]).buffer });
    sock.onmessage!({ data: { strange: true } });
    expect(protocolErrors).toEqual([
      "bad_event_json", "bad_event_json", "bad_frame", "bad_frame",
    ]);
    // Still alive: a valid event after the garbage is delivered.
    sock.onmessage!({ data: JSON.stringify({ event: "sim_status", running: true }) });
    expect(events.length).toBe(1);
    expect(frames.length).toBe(0);
    session.close();
  });

  it("send is a no-op until the socket opens", () => {
    const session = connect();
    const sock = sockets[0]!;
    expect(session.send(setStride(2))).toBe(false);
    expect(sock.sent).toEqual([]);
    sock.onopen!();
    expect(session.send(setStride(2))).toBe(true);
    expect(JSON.parse(sock.sent[0]!)).toEqual({ type: "set_stride", stride: 2 });
    session.close();
    expect(session.send(setStride(3))).toBe(false);
  });

  it("reconnects with doubling capped backoff", () => {
    const session = connect();
    expect(sockets.length).toBe(1);
    sockets[0]!.onclose!();
    expect(sockets.length).toBe(1);
    vi.advanceTimersByTime(499);
    expect(sockets.length).toBe(1);
    vi.advanceTimersByTime(1);
    expect(sockets.length).toBe(2);
    sockets[1]!.onclose!();
    vi.advanceTimersByTime(1000);
    expect(sockets.length).toBe(3);
    expect(session.backoffMs(0)).toBe(500);
    expect(session.backoffMs(4)).toBe(8000);
    expect(session.backoffMs(30)).toBe(8000);
    session.close();
  });

  it("a successful open resets the backoff ladder", () => {
    const session = connect();
    sockets[0]!.onclose!();
    vi.advanceTimersByTime(500);
    sockets[1]!.onopen!();
    sockets[1]!.onclose!();
    // Reset means the next retry is back at the base delay.
    vi.advanceTimersByTime(500);
    expect(sockets.length).toBe(3);
    session.close();
  });

  it("close stops reconnecting", () => {
    const session = connect();
    sockets[0]!.onclose!();
    session.close();
    vi.advanceTimersByTime(60_000);
    expect(sockets.length).toBe(1);
  });

  it("statuses narrate the lifecycle", () => {
    const session = connect();
    sockets[0]!.onopen!();
    sockets[0]!.onclose!();
    expect(statuses).toEqual(["connecting", "open", "closed"]);
    session.close();
  });
});
