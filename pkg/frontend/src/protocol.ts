/** Wire protocol: JSON commands out, JSON events and binary frames in.
 *
 * The frame layout is little-endian throughout:
 *   "HFRM" | frame_id u32 | strand_count u32
 *   per strand: vertex_count u32 | vertex_count x 3 float32
 * decodeFrame is total: every input either yields a FrameData or throws
 * MalformedFrame, and trailing bytes are rejected.
 */

export const FRAME_MAGIC = "HFRM";

export type Vec3 = [number, number, number];

export const COMMAND_TYPES = [
  "chat", "select_style", "sim_control", "wind", "head_transform",
  "grab_begin", "grab_move", "grab_end", "trim", "grow",
  "set_params", "render", "set_stride",
] as const;

export type CommandType = (typeof COMMAND_TYPES)[number];

export interface Command {
  type: CommandType;
  [field: string]: unknown;
}

// -- command builders ---------------------------------------------------

export function chat(text: string): Command {
  return { type: "chat", text };
}

export function selectStyle(styleId: string): Command {
  return { type: "select_style", style_id: styleId };
}

export function simControl(opts: { running?: boolean; reset?: boolean }): Command {
  const cmd: Command = { type: "sim_control" };
  if (opts.running !== undefined) cmd.running = opts.running;
  if (opts.reset !== undefined) cmd.reset = opts.reset;
  return cmd;
}

export function wind(direction: Vec3, strength: number, opts: {
  gustAmplitude?: number; gustFrequency?: number; enabled?: boolean;
} = {}): Command {
  const cmd: Command = { type: "wind", direction, strength };
  if (opts.gustAmplitude !== undefined) cmd.gust_amplitude = opts.gustAmplitude;
  if (opts.gustFrequency !== undefined) cmd.gust_frequency = opts.gustFrequency;
  if (opts.enabled !== undefined) cmd.enabled = opts.enabled;
  return cmd;
}

export function headTransform(rotationRowMajor: number[], translation: Vec3): Command {
  return { type: "head_transform", rotation: rotationRowMajor, translation };
}

export function grabBegin(origin: Vec3, direction: Vec3, radius: number): Command {
  return { type: "grab_begin", origin, direction, radius };
}

export function grabMove(target: Vec3): Command {
  return { type: "grab_move", target };
}

export function grabEnd(): Command {
  return { type: "grab_end" };
}

export function trimSphere(center: Vec3, radius: number): Command {
  return { type: "trim", selector: "sphere", center, radius };
}

export function grow(triangleIds: number[], opts: {
  count?: number; seed?: number; params?: Record<string, number>;
} = {}): Command {
  const cmd: Command = { type: "grow", triangle_ids: triangleIds };
  if (opts.count !== undefined) cmd.count = opts.count;
  if (opts.seed !== undefined) cmd.seed = opts.seed;
  if (opts.params !== undefined) cmd.params = opts.params;
  return cmd;
}

export function setParams(params: Record<string, number>): Command {
  return { type: "set_params", params };
}

export function requestRender(attrs: Record<string, string>, seed = 0): Command {
  return { type: "render", attrs, seed };
}

export function setStride(stride: number): Command {
  return { type: "set_stride", stride };
}

// -- server events ------------------------------------------------------

export interface CandidateEntry {
  id: string;
  score: number;
  thumbnail?: string;
}

export interface ServerEvent {
  event: string;
  [field: string]: unknown;
}

/** True when the parsed JSON value is shaped like a server event. */
export function isServerEvent(value: unknown): value is ServerEvent {
  return typeof value === "object" && value !== null &&
    typeof (value as { event?: unknown }).event === "string";
}

// -- frame packets ------------------------------------------------------

export type FrameFault = "bad_magic" | "truncated" | "trailing_bytes";

export class MalformedFrame extends Error {
  readonly fault: FrameFault;

  constructor(fault: FrameFault, message: string) {
    super(message);
    this.name = "MalformedFrame";
    this.fault = fault;
  }
}

export interface FrameData {
  frameId: number;
  /** One Float32Array of length 3*n per strand, viewing the packet buffer. */
  strands: Float32Array[];
  vertexTotal: number;
}

const HEADER_BYTES = 12;

export function decodeFrame(buf: ArrayBuffer): FrameData {
  const view = new DataView(buf);
  if (buf.byteLength < HEADER_BYTES) {
    throw new MalformedFrame("truncated", `packet is ${buf.byteLength} bytes, header needs ${HEADER_BYTES}`);
  }
  for (let i = 0; i < 4; i++) {
    if (view.getUint8(i) !== FRAME_MAGIC.charCodeAt(i)) {
      throw new MalformedFrame("bad_magic", "packet does not start with the frame magic");
    }
  }
  const frameId = view.getUint32(4, true);
  const strandCount = view.getUint32(8, true);
  const strands: Float32Array[] = [];
  let vertexTotal = 0;
  let offset = HEADER_BYTES;
  for (let s = 0; s < strandCount; s++) {
    if (offset + 4 > buf.byteLength) {
      throw new MalformedFrame("truncated", `strand ${s} count field runs past the packet end`);
    }
    const count = view.getUint32(offset, true);
    offset += 4;
    const bytes = count * 12;
    if (offset + bytes > buf.byteLength) {
      throw new MalformedFrame("truncated", `strand ${s} data runs past the packet end`);
    }
    // Every offset here is 4-aligned (12-byte header, 4-byte counts,
    // 12-byte vertices), so the view never copies.
    strands.push(new Float32Array(buf, offset, count * 3));
    vertexTotal += count;
    offset += bytes;
  }
  if (offset !== buf.byteLength) {
    throw new MalformedFrame("trailing_bytes", `${buf.byteLength - offset} bytes after the last strand`);
  }
  return { frameId, strands, vertexTotal };
}
