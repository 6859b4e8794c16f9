import { describe, expect, it } from "vitest";
import {
  COMMAND_TYPES, decodeFrame, MalformedFrame,
  chat, grabBegin, grow, selectStyle, setStride, trimSphere, wind,
} from "../src/protocol.js";

/** Reference packet produced by the server encoder: frame 42, strands
 * of 2, 3, and 1 vertices. */
const GOLDEN_HEX =
  "4846524d2a00000003000000020000000000c03f000010c0000040400000000000407544000000be" +
  "03000000000020410000a0410000f041000080bf000000c0000040c00000f0400000084100001841" +
  "010000000000803e0000003f0000403f";

const GOLDEN_STRANDS: number[][][] = [
  [[1.5, -2.25, 3.0], [0.0, 981.0, -0.125]],
  [[10.0, 20.0, 30.0], [-1.0, -2.0, -3.0], [7.5, 8.5, 9.5]],
  [[0.25, 0.5, 0.75]],
];

function hexToBuf(hex: string): ArrayBuffer {
  const bytes = new Uint8Array(hex.length / 2);
  for (let i = 0; i < bytes.length; i++) {
    bytes[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return bytes.buffer;
}

function bufToHex(buf: ArrayBuffer): string {
  return [...new Uint8Array(buf)].map((b) => b.toString(16).padStart(2, "0")).join("");
}

/** Test-local encoder mirroring the published layout. */
function encodePacket(frameId: number, strands: number[][][]): ArrayBuffer {
  const vertexTotal = strands.reduce((n, s) => n + s.length, 0);
  const buf = new ArrayBuffer(12 + strands.length * 4 + vertexTotal * 12);
  const view = new DataView(buf);
  view.setUint8(0, 0x48); // H
  view.setUint8(1, 0x46); // F
  view.setUint8(2, 0x52); // R
  view.setUint8(3, 0x4d); // M
  view.setUint32(4, frameId >>> 0, true);
  view.setUint32(8, strands.length, true);
  let off = 12;
  for (const strand of strands) {
    view.setUint32(off, strand.length, true);
    off += 4;
    for (const v of strand) {
      view.setFloat32(off, v[0]!, true);
      view.setFloat32(off + 4, v[1]!, true);
      view.setFloat32(off + 8, v[2]!, true);
      off += 12;
    }
  }
  return buf;
}

function xorshift(seed: number): () => number {
  let x = seed >>> 0 || 1;
  return () => {
    x ^= x << 13; x >>>= 0;
    x ^= x >> 17;
    x ^= x << 5; x >>>= 0;
    return x / 0xffffffff;
  };
}

describe("decodeFrame", () => {
  it("decodes the reference packet exactly", () => {
    const fd = decodeFrame(hexToBuf(GOLDEN_HEX));
    expect(fd.frameId).toBe(42);
    expect(fd.strands.length).toBe(3);
    expect(fd.vertexTotal).toBe(6);
    for (const [s, strand] of GOLDEN_STRANDS.entries()) {
      expect([...fd.strands[s]!]).toEqual(strand.flat());
    }
  });

  it("local encoder reproduces the reference bytes", () => {
    expect(bufToHex(encodePacket(42, GOLDEN_STRANDS))).toBe(GOLDEN_HEX);
  });

  it("round-trips varied shapes including empty packets", () => {
    const shapes: number[][][][] = [
      [],
      [[[0, 0, 0]]],
      [[], [[1, 2, 3]], []],
      [[[1e6, -1e6, 0.5], [2, 2, 2], [3, 3, 3], [4, 4, 4]]],
    ];
    for (const strands of shapes) {
      const fd = decodeFrame(encodePacket(7, strands));
      expect(fd.frameId).toBe(7);
      expect(fd.strands.map((s) => [...s])).toEqual(strands.map((s) => s.flat()));
    }
  });

  it("returns zero-copy views over the input buffer", () => {
    const buf = encodePacket(1, GOLDEN_STRANDS);
    const fd = decodeFrame(buf);
    expect(fd.strands[0]!.buffer).toBe(buf);
  });

  it("rejects every truncation of the reference packet", () => {
    const full = new Uint8Array(hexToBuf(GOLDEN_HEX));
    for (let len = 0; len < full.length; len++) {
      const cut = full.slice(0, len).buffer;
      let fault = "";
      try {
        decodeFrame(cut);
      } catch (err) {
        expect(err).toBeInstanceOf(MalformedFrame);
        fault = (err as MalformedFrame).fault;
      }
      expect(fault, `prefix of ${len} bytes`).toBe("truncated");
    }
  });

  it("rejects trailing bytes", () => {
    for (const extra of [1, 4, 13]) {
      const full = new Uint8Array(hexToBuf(GOLDEN_HEX));
      const padded = new Uint8Array(full.length + extra);
      padded.set(full);
      expect(() => decodeFrame(padded.buffer)).toThrowError(MalformedFrame);
      try {
        decodeFrame(padded.buffer);
      } catch (err) {
        expect((err as MalformedFrame).fault).toBe("trailing_bytes");
      }
    }
  });

  it("rejects a wrong magic", () => {
    const bytes = new Uint8Array(hexToBuf(GOLDEN_HEX));
    bytes[0] = 0x58;
    try {
      decodeFrame(bytes.buffer);
      expect.unreachable();
    } catch (err) {
      expect((err as MalformedFrame).fault).toBe("bad_magic");
    }
  });

  it("rejects tampered counts", () => {
    const bumpVertexCount = new Uint8Array(hexToBuf(GOLDEN_HEX));
    bumpVertexCount[12] = 3; // first strand claims an extra vertex
    expect(() => decodeFrame(bumpVertexCount.buffer)).toThrowError(MalformedFrame);

    const moreStrands = new Uint8Array(hexToBuf(GOLDEN_HEX));
    moreStrands[8] = 4;
    expect(() => decodeFrame(moreStrands.buffer)).toThrowError(MalformedFrame);

    const fewerStrands = new Uint8Array(hexToBuf(GOLDEN_HEX));
    fewerStrands[8] = 2;
    try {
      decodeFrame(fewerStrands.buffer);
      expect.unreachable();
    } catch (err) {
      expect((err as MalformedFrame).fault).toBe("trailing_bytes");
    }
  });

  it("survives a fuzz barrage: decodes or throws MalformedFrame, nothing else", () => {
    const rand = xorshift(0x5eed);
    let decoded = 0;
    let rejected = 0;
    for (let i = 0; i < 1500; i++) {
      let buf: ArrayBuffer;
      if (i % 3 === 0) {
        // Mutations of a valid packet are the nastiest inputs.
        const bytes = new Uint8Array(hexToBuf(GOLDEN_HEX));
        const flips = 1 + Math.floor(rand() * 4);
        for (let k = 0; k < flips; k++) {
          bytes[Math.floor(rand() * bytes.length)] = Math.floor(rand() * 256);
        }
        buf = bytes.buffer;
      } else {
        const bytes = new Uint8Array(Math.floor(rand() * 300));
        for (let k = 0; k < bytes.length; k++) bytes[k] = Math.floor(rand() * 256);
        buf = bytes.buffer;
      }
      try {
        decodeFrame(buf);
        decoded++;
      } catch (err) {
        expect(err).toBeInstanceOf(MalformedFrame);
        rejected++;
      }
    }
    expect(decoded + rejected).toBe(1500);
    expect(rejected).toBeGreaterThan(0);
  });

  it("decodes a 2000-strand packet well under the 4 ms budget", () => {
    const rand = xorshift(0xfeed);
    const strands: number[][][] = Array.from({ length: 2000 }, () =>
      Array.from({ length: 16 }, () => [rand() * 60 - 30, rand() * 60 - 30, rand() * 60 - 30]));
    const packet = encodePacket(9, strands);
    for (let i = 0; i < 5; i++) decodeFrame(packet);
    const times: number[] = [];
    for (let i = 0; i < 30; i++) {
      const t0 = performance.now();
      const fd = decodeFrame(packet);
      times.push(performance.now() - t0);
      expect(fd.strands.length).toBe(2000);
    }
    times.sort((a, b) => a - b);
    expect(times[15]!).toBeLessThan(4);
  });
});

describe("command builders", () => {
  it("cover exactly the published command set", () => {
    expect(COMMAND_TYPES.length).toBe(13);
    expect(new Set(COMMAND_TYPES).size).toBe(13);
  });

  it("emit wire-shaped payloads", () => {
    expect(chat("windy please")).toEqual({ type: "chat", text: "windy please" });
    expect(selectStyle("bob_short")).toEqual({ type: "select_style", style_id: "bob_short" });
    expect(setStride(4)).toEqual({ type: "set_stride", stride: 4 });
    expect(trimSphere([1, 2, 3], 2.5)).toEqual(
      { type: "trim", selector: "sphere", center: [1, 2, 3], radius: 2.5 });
    expect(grabBegin([0, 0, 50], [0, 0, -1], 3)).toEqual(
      { type: "grab_begin", origin: [0, 0, 50], direction: [0, 0, -1], radius: 3 });
    expect(wind([1, 0, 0], 60)).toEqual({ type: "wind", direction: [1, 0, 0], strength: 60 });
    expect(grow([5, 2], { count: 20, seed: 1 })).toEqual(
      { type: "grow", triangle_ids: [5, 2], count: 20, seed: 1 });
  });
});
