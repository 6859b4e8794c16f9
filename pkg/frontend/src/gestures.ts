/** Pointer gestures to protocol commands.
 *
 * Exactly one mode is active at a time. Orbit is purely local (camera
 * only, no commands); grab, trim, and paint translate pointer rays into
 * grab_begin/move/end, sphere trims along the stroke, and a grow over
 * the painted scalp bins. The sim itself is never touched locally:
 * every mutation leaves as a command and comes back as frames.
 */

import { OrbitCamera, rayPoint, raySphere, type Ray } from "./camera.js";
import { DEFAULT_HEAD, type HeadSphere } from "./render.js";
import {
  grabBegin, grabEnd, grabMove, grow, trimSphere, type Command, type Vec3,
} from "./protocol.js";

export const MODES = ["orbit", "grab", "trim", "paint"] as const;
export type Mode = (typeof MODES)[number];

export interface GestureOptions {
  head?: HeadSphere;
  /** Triangle ids sent by paint are kept inside [0, triangleCount). */
  triangleCount?: number;
  grabRadius?: number;
  trimRadius?: number;
  /** Pointer travel in px below which a grab drag emits no moves. */
  moveEpsilonPx?: number;
  /** Stroke spacing in px between consecutive trim spheres. */
  trimSpacingPx?: number;
  /** Strands grown per painted bin. */
  growPerBin?: number;
}

const AZ_BINS = 16;
const EL_BINS = 8;

export class GestureController {
  private readonly cam: OrbitCamera;
  private readonly head: HeadSphere;
  private readonly triangleCount: number;
  private readonly grabRadius: number;
  private readonly trimRadius: number;
  private readonly moveEpsilonPx: number;
  private readonly trimSpacingPx: number;
  private readonly growPerBin: number;

  private currentMode: Mode = "orbit";
  private dragging = false;
  private lastX = 0;
  private lastY = 0;
  private grabDepth = 0;
  private grabActive = false;
  private painted = new Set<number>();
  private paintNonce = 0;

  constructor(cam: OrbitCamera, opts: GestureOptions = {}) {
    this.cam = cam;
    this.head = opts.head ?? DEFAULT_HEAD;
    this.triangleCount = opts.triangleCount ?? 1472;
    this.grabRadius = opts.grabRadius ?? 3.0;
    this.trimRadius = opts.trimRadius ?? 2.5;
    this.moveEpsilonPx = opts.moveEpsilonPx ?? 3;
    this.trimSpacingPx = opts.trimSpacingPx ?? 14;
    this.growPerBin = opts.growPerBin ?? 10;
  }

  get mode(): Mode {
    return this.currentMode;
  }

  /** Switch modes; an in-flight grab is released so the server never
   * stays holding strands for a pointer that stopped mattering. */
  setMode(mode: Mode): Command[] {
    if (!MODES.includes(mode)) {
      throw new RangeError(`unknown gesture mode ${String(mode)}`);
    }
    const out: Command[] = [];
    if (this.grabActive) {
      out.push(grabEnd());
    }
    this.currentMode = mode;
    this.dragging = false;
    this.grabActive = false;
    this.painted.clear();
    return out;
  }

  pointerDown(x: number, y: number): Command[] {
    this.dragging = true;
    this.lastX = x;
    this.lastY = y;
    switch (this.currentMode) {
      case "orbit":
        return [];
      case "grab": {
        const ray = this.cam.screenRay(x, y);
        this.grabDepth = this.targetDepth(ray);
        this.grabActive = true;
        return [grabBegin(ray.origin, ray.dir, this.grabRadius)];
      }
      case "trim":
        return [trimSphere(this.strokePoint(x, y), this.trimRadius)];
      case "paint": {
        this.paintAt(x, y);
        return [];
      }
    }
  }

  pointerMove(x: number, y: number): Command[] {
    if (!this.dragging) return [];
    const dx = x - this.lastX;
    const dy = y - this.lastY;
    switch (this.currentMode) {
      case "orbit":
        this.cam.orbit(dx, dy);
        this.lastX = x;
        this.lastY = y;
        return [];
      case "grab": {
        if (!this.grabActive || Math.hypot(dx, dy) < this.moveEpsilonPx) return [];
        this.lastX = x;
        this.lastY = y;
        const ray = this.cam.screenRay(x, y);
        return [grabMove(rayPoint(ray, this.grabDepth))];
      }
      case "trim": {
        if (Math.hypot(dx, dy) < this.trimSpacingPx) return [];
        this.lastX = x;
        this.lastY = y;
        return [trimSphere(this.strokePoint(x, y), this.trimRadius)];
      }
      case "paint": {
        this.paintAt(x, y);
        return [];
      }
    }
  }

  pointerUp(_x: number, _y: number): Command[] {
    if (!this.dragging) return [];
    this.dragging = false;
    switch (this.currentMode) {
      case "orbit":
      case "trim":
        return [];
      case "grab": {
        if (!this.grabActive) return [];
        this.grabActive = false;
        return [grabEnd()];
      }
      case "paint": {
        if (!this.painted.size) return [];
        const ids = [...this.painted].sort((a, b) => a - b);
        this.painted.clear();
        return [grow(ids, {
          count: Math.min(120, ids.length * this.growPerBin),
          seed: this.paintNonce++,
        })];
      }
    }
  }

  /** Zoom is local like orbit; never a command. */
  wheel(deltaY: number): Command[] {
    this.cam.zoom(deltaY);
    return [];
  }

  /** Depth along the ray of the plane through the camera target. */
  private targetDepth(ray: Ray): number {
    const t = this.cam.target;
    return Math.max(
      this.cam.minDistance,
      (t[0] - ray.origin[0]) * ray.dir[0] +
      (t[1] - ray.origin[1]) * ray.dir[1] +
      (t[2] - ray.origin[2]) * ray.dir[2],
    );
  }

  /** World point for a trim stroke sample: the hair shell around the
   * head when the ray hits it, else the target-plane depth. */
  private strokePoint(x: number, y: number): Vec3 {
    const ray = this.cam.screenRay(x, y);
    const t = raySphere(ray, this.head.center, this.head.radius * 1.5)
      ?? this.targetDepth(ray);
    return rayPoint(ray, t);
  }

  /** The scalp is addressed as azimuth x elevation bins folded into the
   * server's triangle id range; the true mesh lives server-side only. */
  private paintAt(x: number, y: number): void {
    const ray = this.cam.screenRay(x, y);
    const t = raySphere(ray, this.head.center, this.head.radius);
    if (t === null) return;
    const p = rayPoint(ray, t);
    const nx = (p[0] - this.head.center[0]) / this.head.radius;
    const ny = (p[1] - this.head.center[1]) / this.head.radius;
    const nz = (p[2] - this.head.center[2]) / this.head.radius;
    const az = (Math.atan2(nz, nx) + Math.PI) / (2 * Math.PI);
    const el = (ny + 1) / 2;
    const azBin = Math.min(AZ_BINS - 1, Math.floor(az * AZ_BINS));
    const elBin = Math.min(EL_BINS - 1, Math.floor(el * EL_BINS));
    this.painted.add((elBin * AZ_BINS + azBin) % this.triangleCount);
  }
}
