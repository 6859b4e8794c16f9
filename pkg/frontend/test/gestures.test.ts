import { beforeEach, describe, expect, it } from "vitest";
import { OrbitCamera } from "../src/camera.js";
import { GestureController, MODES, type Mode } from "../src/gestures.js";
import type { Command, Vec3 } from "../src/protocol.js";

let cam: OrbitCamera;
let g: GestureController;

beforeEach(() => {
  cam = new OrbitCamera();
  cam.resize(800, 600);
  g = new GestureController(cam);
});

const CENTER = { x: 400, y: 300 };

function types(cmds: Command[]): string[] {
  return cmds.map((c) => c.type);
}

describe("modes", () => {
  it("starts in orbit with exactly the published modes", () => {
    expect(g.mode).toBe("orbit");
    expect(MODES).toEqual(["orbit", "grab", "trim", "paint"]);
  });

  it("switches exclusively and rejects unknown modes", () => {
    g.setMode("trim");
    expect(g.mode).toBe("trim");
    expect(() => g.setMode("lasso" as Mode)).toThrow(RangeError);
    expect(g.mode).toBe("trim");
  });
});

describe("orbit", () => {
  it("drag moves the camera and never emits commands", () => {
    const az0 = cam.azimuth;
    expect(g.pointerDown(100, 100)).toEqual([]);
    expect(g.pointerMove(160, 120)).toEqual([]);
    expect(g.pointerUp(160, 120)).toEqual([]);
    expect(cam.azimuth).not.toBe(az0);
  });

  it("wheel zooms locally", () => {
    const d0 = cam.distance;
    expect(g.wheel(240)).toEqual([]);
    expect(cam.distance).toBeGreaterThan(d0);
  });
});

describe("grab", () => {
  beforeEach(() => g.setMode("grab"));

  it("click-release emits begin and end with zero moves", () => {
    const down = g.pointerDown(CENTER.x, CENTER.y);
    expect(types(down)).toEqual(["grab_begin"]);
    const begin = down[0]!;
    expect((begin.radius as number)).toBeGreaterThan(0);
    for (const key of ["origin", "direction"] as const) {
      const v = begin[key] as Vec3;
      expect(v.length).toBe(3);
      expect(v.every(Number.isFinite)).toBe(true);
    }
    expect(types(g.pointerUp(CENTER.x, CENTER.y))).toEqual(["grab_end"]);
  });

  it("drag emits moves only past the jitter threshold", () => {
    g.pointerDown(CENTER.x, CENTER.y);
    expect(g.pointerMove(CENTER.x + 1, CENTER.y)).toEqual([]);
    const moved = g.pointerMove(CENTER.x + 40, CENTER.y + 10);
    expect(types(moved)).toEqual(["grab_move"]);
    const target = moved[0]!.target as Vec3;
    expect(target.every(Number.isFinite)).toBe(true);
    expect(types(g.pointerUp(CENTER.x + 40, CENTER.y + 10))).toEqual(["grab_end"]);
  });

  it("mode switch mid-drag releases the grab", () => {
    g.pointerDown(CENTER.x, CENTER.y);
    expect(types(g.setMode("orbit"))).toEqual(["grab_end"]);
    expect(g.pointerUp(CENTER.x, CENTER.y)).toEqual([]);
  });
});

describe("trim", () => {
  beforeEach(() => g.setMode("trim"));

  it("stroke drops spaced spheres along the path", () => {
    const all: Command[] = [];
    all.push(...g.pointerDown(350, 300));
    for (let x = 352; x <= 460; x += 2) all.push(...g.pointerMove(x, 300));
    all.push(...g.pointerUp(460, 300));
    expect(all.length).toBeGreaterThanOrEqual(3);
    const centers = new Set<string>();
    for (const cmd of all) {
      expect(cmd.type).toBe("trim");
      expect(cmd.selector).toBe("sphere");
      expect(cmd.radius as number).toBeGreaterThan(0);
      centers.add(JSON.stringify(cmd.center));
    }
    expect(centers.size).toBe(all.length);
  });

  it("tiny wiggles do not spam the server", () => {
    g.pointerDown(400, 300);
    expect(g.pointerMove(402, 301)).toEqual([]);
    expect(g.pointerMove(403, 299)).toEqual([]);
  });
});

describe("paint", () => {
  beforeEach(() => g.setMode("paint"));

  it("stroke over the head grows once with unique in-range ids", () => {
    expect(g.pointerDown(380, 280)).toEqual([]);
    for (let x = 382; x <= 430; x += 2) g.pointerMove(x, 285);
    const up = g.pointerUp(430, 285);
    expect(types(up)).toEqual(["grow"]);
    const ids = up[0]!.triangle_ids as number[];
    expect(ids.length).toBeGreaterThan(0);
    expect(new Set(ids).size).toBe(ids.length);
    expect([...ids]).toEqual([...ids].sort((a, b) => a - b));
    for (const id of ids) {
      expect(id).toBeGreaterThanOrEqual(0);
      expect(id).toBeLessThan(1472);
    }
    expect(up[0]!.count as number).toBeGreaterThan(0);
    expect(up[0]!.count as number).toBeLessThanOrEqual(120);
  });

  it("strokes use distinct seeds", () => {
    g.pointerDown(400, 300);
    const first = g.pointerUp(400, 300)[0]!;
    g.pointerDown(400, 300);
    const second = g.pointerUp(400, 300)[0]!;
    expect(first.seed).not.toBe(second.seed);
  });

  it("a stroke that misses the head grows nothing", () => {
    g.pointerDown(5, 5);
    g.pointerMove(9, 9);
    expect(g.pointerUp(9, 9)).toEqual([]);
  });
});
