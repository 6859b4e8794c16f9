/** Canvas renderer: depth-shaded strand polylines over a head sphere.
 *
 * Strands are painter-sorted by mean depth (far first) and shaded from
 * the frame's own depth range, so shading stays stable as the camera
 * moves. With no frame only the head is drawn.
 */

import type { OrbitCamera } from "./camera.js";
import type { FrameData, Vec3 } from "./protocol.js";

export interface HeadSphere {
  center: Vec3;
  radius: number;
}

/** Rough bounding sphere of the server's built-in head fixture. */
export const DEFAULT_HEAD: HeadSphere = { center: [0, 0, 0], radius: 9 };

interface StrandDraw {
  start: number;
  depth: number;
}

export class ViewportRenderer {
  readonly head: HeadSphere;
  private order: StrandDraw[] = [];

  constructor(head: HeadSphere = DEFAULT_HEAD) {
    this.head = head;
  }

  draw(ctx: CanvasRenderingContext2D, cam: OrbitCamera, frame: FrameData | null): void {
    ctx.fillStyle = "#14161a";
    ctx.fillRect(0, 0, cam.width, cam.height);
    this.drawHead(ctx, cam);
    if (frame && frame.strands.length) this.drawStrands(ctx, cam, frame);
  }

  private drawHead(ctx: CanvasRenderingContext2D, cam: OrbitCamera): void {
    const p = cam.project(this.head.center);
    if (!p) return;
    const r = (this.head.radius * cam.focal()) / p.depth;
    const g = ctx.createRadialGradient(p.x - r * 0.3, p.y - r * 0.35, r * 0.15, p.x, p.y, r);
    g.addColorStop(0, "#4c4640");
    g.addColorStop(1, "#2a2724");
    ctx.fillStyle = g;
    ctx.beginPath();
    ctx.arc(p.x, p.y, r, 0, Math.PI * 2);
    ctx.fill();
  }

  private drawStrands(ctx: CanvasRenderingContext2D, cam: OrbitCamera, frame: FrameData): void {
    const { right, up, forward } = cam.basis();
    const eye = cam.eye();
    const f = cam.focal();
    const halfW = cam.width / 2;
    const halfH = cam.height / 2;

    const n = frame.strands.length;
    if (this.order.length !== n) {
      this.order = Array.from({ length: n }, () => ({ start: 0, depth: 0 }));
    }
    let minDepth = Infinity;
    let maxDepth = -Infinity;
    for (let s = 0; s < n; s++) {
      const v = frame.strands[s]!;
      let depth = 0;
      for (let i = 0; i < v.length; i += 3) {
        depth += (v[i]! - eye[0]) * forward[0] +
          (v[i + 1]! - eye[1]) * forward[1] +
          (v[i + 2]! - eye[2]) * forward[2];
      }
      depth = v.length ? depth / (v.length / 3) : 0;
      const slot = this.order[s]!;
      slot.start = s;
      slot.depth = depth;
      if (depth < minDepth) minDepth = depth;
      if (depth > maxDepth) maxDepth = depth;
    }
    this.order.sort((a, b) => b.depth - a.depth);
    const range = Math.max(1e-6, maxDepth - minDepth);

    ctx.lineWidth = 1;
    ctx.lineJoin = "round";
    for (const slot of this.order) {
      const v = frame.strands[slot.start]!;
      if (v.length < 3) continue;
      // Near strands brighter, far strands darker.
      const near = 1 - (slot.depth - minDepth) / range;
      const lum = 28 + near * 44;
      ctx.strokeStyle = `hsl(28 38% ${lum.toFixed(1)}%)`;
      ctx.beginPath();
      let started = false;
      for (let i = 0; i < v.length; i += 3) {
        const dx = v[i]! - eye[0];
        const dy = v[i + 1]! - eye[1];
        const dz = v[i + 2]! - eye[2];
        const depth = dx * forward[0] + dy * forward[1] + dz * forward[2];
        if (depth < 1e-6) {
          started = false;
          continue;
        }
        const sx = halfW + f * (dx * right[0] + dy * right[1] + dz * right[2]) / depth;
        const sy = halfH - f * (dx * up[0] + dy * up[1] + dz * up[2]) / depth;
        if (started) {
          ctx.lineTo(sx, sy);
        } else {
          ctx.moveTo(sx, sy);
          started = true;
        }
      }
      ctx.stroke();
    }
  }
}

/** Rolling frames-per-second estimate over ~1 s of samples. */
export class FpsTracker {
  private stamps: number[] = [];

  tick(nowMs: number): number {
    this.stamps.push(nowMs);
    const cutoff = nowMs - 1000;
    while (this.stamps.length && this.stamps[0]! < cutoff) this.stamps.shift();
    return this.stamps.length;
  }
}
