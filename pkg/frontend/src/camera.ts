/** Orbit camera with a pinhole projection and its exact inverse ray.
 *
 * project and screenRay are mutual inverses: the ray through a point's
 * projected pixel passes through the point, which is what lets grab and
 * trim gestures address world space from the canvas.
 */

import type { Vec3 } from "./protocol.js";

export interface Basis {
  right: Vec3;
  up: Vec3;
  forward: Vec3;
}

export interface Projected {
  x: number;
  y: number;
  /** Distance along the camera forward axis, in world units. */
  depth: number;
}

export interface Ray {
  origin: Vec3;
  dir: Vec3;
}

const ELEVATION_LIMIT = Math.PI / 2 - 0.05;

function norm(v: Vec3): Vec3 {
  const m = Math.hypot(v[0], v[1], v[2]);
  return m > 0 ? [v[0] / m, v[1] / m, v[2] / m] : [0, 0, 1];
}

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export class OrbitCamera {
  azimuth = 0.5;
  elevation = 0.18;
  distance = 70;
  target: Vec3 = [0, 0, 0];
  fovY = Math.PI / 4;
  width = 800;
  height = 600;
  minDistance = 12;
  maxDistance = 400;

  resize(width: number, height: number): void {
    this.width = Math.max(1, width);
    this.height = Math.max(1, height);
  }

  eye(): Vec3 {
    const ce = Math.cos(this.elevation);
    return [
      this.target[0] + this.distance * ce * Math.sin(this.azimuth),
      this.target[1] + this.distance * Math.sin(this.elevation),
      this.target[2] + this.distance * ce * Math.cos(this.azimuth),
    ];
  }

  basis(): Basis {
    const eye = this.eye();
    const forward = norm([
      this.target[0] - eye[0],
      this.target[1] - eye[1],
      this.target[2] - eye[2],
    ]);
    const right = norm(cross(forward, [0, 1, 0]));
    const up = cross(right, forward);
    return { right, up, forward };
  }

  /** Pixels of focal length for the current viewport. */
  focal(): number {
    return (this.height / 2) / Math.tan(this.fovY / 2);
  }

  /** Project a world point; null when at or behind the eye plane. */
  project(p: Vec3): Projected | null {
    const eye = this.eye();
    const { right, up, forward } = this.basis();
    const d: Vec3 = [p[0] - eye[0], p[1] - eye[1], p[2] - eye[2]];
    const depth = dot(d, forward);
    if (depth < 1e-6) return null;
    const f = this.focal();
    return {
      x: this.width / 2 + f * dot(d, right) / depth,
      y: this.height / 2 - f * dot(d, up) / depth,
      depth,
    };
  }

  /** World-space ray through a canvas pixel. */
  screenRay(sx: number, sy: number): Ray {
    const { right, up, forward } = this.basis();
    const f = this.focal();
    const cx = (sx - this.width / 2) / f;
    const cy = -(sy - this.height / 2) / f;
    return {
      origin: this.eye(),
      dir: norm([
        forward[0] + cx * right[0] + cy * up[0],
        forward[1] + cx * right[1] + cy * up[1],
        forward[2] + cx * right[2] + cy * up[2],
      ]),
    };
  }

  /** Rotate around the target; dx/dy in pixels of pointer travel. */
  orbit(dx: number, dy: number): void {
    this.azimuth -= dx * 0.01;
    this.elevation = Math.min(
      ELEVATION_LIMIT,
      Math.max(-ELEVATION_LIMIT, this.elevation + dy * 0.01),
    );
  }

  /** Wheel zoom; positive delta moves away. */
  zoom(deltaY: number): void {
    this.distance = Math.min(
      this.maxDistance,
      Math.max(this.minDistance, this.distance * Math.exp(deltaY * 0.001)),
    );
  }
}

/** Point along a ray at parameter t. */
export function rayPoint(ray: Ray, t: number): Vec3 {
  return [
    ray.origin[0] + ray.dir[0] * t,
    ray.origin[1] + ray.dir[1] * t,
    ray.origin[2] + ray.dir[2] * t,
  ];
}

/** Smallest positive t where the ray meets the sphere, else null. */
export function raySphere(ray: Ray, center: Vec3, radius: number): number | null {
  const oc: Vec3 = [
    ray.origin[0] - center[0],
    ray.origin[1] - center[1],
    ray.origin[2] - center[2],
  ];
  const b = dot(oc, ray.dir);
  const c = dot(oc, oc) - radius * radius;
  const disc = b * b - c;
  if (disc < 0) return null;
  const root = Math.sqrt(disc);
  const t0 = -b - root;
  if (t0 > 0) return t0;
  const t1 = -b + root;
  return t1 > 0 ? t1 : null;
}
