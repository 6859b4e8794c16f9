"""Depth-shaded strand rasterizer for edge-conditioning screenshots.

Strand polylines are perspective-projected and drawn as one-pixel
anti-aliased lines whose brightness falls off with depth, over an
optional head silhouette filled from the head's collision proxies.
The output is judged only through the edge-detection contract, so the
shading model stays deliberately simple and fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateCamera, NonFiniteInput
from .image import GrayImage

_NEAR = 1e-2
_SAMPLE_SPACING = 0.75  # px between splats along a segment
_HEAD_SHADE = 0.42      # silhouette brightness relative to nearest strand
_MIN_SHADE = 0.35       # farthest strand brightness


@dataclass(frozen=True, slots=True)
class Camera:
    """Perspective camera: position, look-at target, vertical field of view."""

    eye: tuple
    target: tuple
    up: tuple = (0.0, 1.0, 0.0)
    fov_y_deg: float = 45.0
    width: int = 512
    height: int = 512

    def __post_init__(self):
        eye = tuple(float(v) for v in self.eye)
        target = tuple(float(v) for v in self.target)
        up = tuple(float(v) for v in self.up)
        for name, vec in (("eye", eye), ("target", target), ("up", up)):
            if not all(math.isfinite(v) for v in vec):
                raise NonFiniteInput(f"camera {name} is not finite: {vec}")
        if not 0.0 < self.fov_y_deg < 180.0:
            raise ValueError(f"fov_y_deg must be in (0, 180), got {self.fov_y_deg}")
        if self.width < 1 or self.height < 1:
            raise ValueError("camera viewport must be at least 1x1")
        if sum((e - t) ** 2 for e, t in zip(eye, target)) < 1e-20:
            raise DegenerateCamera(f"eye coincides with target at {eye}")
        object.__setattr__(self, "eye", eye)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "up", up)

    def basis(self):
        """Right-handed (right, up, forward) unit vectors."""
        eye = np.array(self.eye)
        fwd = np.array(self.target) - eye
        fwd /= np.linalg.norm(fwd)
        up_hint = np.array(self.up, np.float64)
        right = np.cross(fwd, up_hint)
        n = np.linalg.norm(right)
        if n < 1e-9:  # looking straight along the up hint
            up_hint = np.array([1.0, 0.0, 0.0])
            right = np.cross(fwd, up_hint)
            n = np.linalg.norm(right)
        right /= n
        up = np.cross(right, fwd)
        return right, up, fwd


def _project(points: np.ndarray, cam: Camera):
    """World points -> (screen x, screen y, view depth); depth <= near is culled by caller."""
    right, up, fwd = cam.basis()
    d = points - np.array(cam.eye)
    z = d @ fwd
    half_h = math.tan(math.radians(cam.fov_y_deg) * 0.5)
    aspect = cam.width / cam.height
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = ((d @ right) / (z * half_h * aspect) * 0.5 + 0.5) * cam.width
        sy = (0.5 - (d @ up) / (z * half_h) * 0.5) * cam.height
    return sx, sy, z


def _splat_max(canvas: np.ndarray, px, py, value):
    """Bilinear max-blend of weighted samples into the float canvas."""
    h, w = canvas.shape
    ix = np.floor(px).astype(np.int64)
    iy = np.floor(py).astype(np.int64)
    fx = px - ix
    fy = py - iy
    for ox, oy, wgt in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                        (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        xx = ix + ox
        yy = iy + oy
        ok = (xx >= 0) & (xx < w) & (yy >= 0) & (yy < h)
        np.maximum.at(canvas, (yy[ok], xx[ok]), value[ok] * wgt[ok])


def _shade(depth: np.ndarray, zmin: float, zmax: float) -> np.ndarray:
    if zmax - zmin < 1e-9:
        return np.ones_like(depth)
    t = np.clip((zmax - depth) / (zmax - zmin), 0.0, 1.0)
    return _MIN_SHADE + (1.0 - _MIN_SHADE) * t


def _draw_head(canvas: np.ndarray, head, cam: Camera, zmin, zmax):
    proxies = np.asarray(head.collision_proxies, np.float64).reshape(-1, 4)
    if proxies.shape[0] == 0:
        return
    sx, sy, z = _project(proxies[:, :3], cam)
    half_h = math.tan(math.radians(cam.fov_y_deg) * 0.5)
    h, w = canvas.shape
    for cx, cy, cz, r in zip(sx, sy, z, proxies[:, 3]):
        if cz <= _NEAR:
            continue
        pr = r / (cz * half_h) * 0.5 * cam.height
        if pr <= 0.0:
            continue
        shade = _HEAD_SHADE * float(_shade(np.array([cz]), zmin, zmax)[0])
        x0 = max(int(math.floor(cx - pr)), 0)
        x1 = min(int(math.ceil(cx + pr)) + 1, w)
        y0 = max(int(math.floor(cy - pr)), 0)
        y1 = min(int(math.ceil(cy + pr)) + 1, h)
        if x0 >= x1 or y0 >= y1:
            continue
        ys, xs = np.mgrid[y0:y1, x0:x1]
        inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= pr * pr
        patch = canvas[y0:y1, x0:x1]
        np.maximum(patch, np.where(inside, shade, 0.0), out=patch)


def rasterize_strands(h, cam: Camera, head=None) -> GrayImage:
    """Render a hairstyle (and optional head silhouette) to grayscale.

    Raises
    ------
    DegenerateCamera
        Via Camera construction; rasterization itself is total.
    """
    canvas = np.zeros((cam.height, cam.width), np.float64)

    all_pts = [np.asarray(s.vertices, np.float64) for s in h.strands]
    flat = np.concatenate(all_pts, axis=0) if all_pts else np.zeros((0, 3))
    if flat.shape[0]:
        _, _, z_all = _project(flat, cam)
        vis = z_all > _NEAR
        if vis.any():
            zmin = float(z_all[vis].min())
            zmax = float(z_all[vis].max())
        else:
            zmin, zmax = _NEAR, _NEAR + 1.0
    else:
        zmin, zmax = _NEAR, _NEAR + 1.0

    if head is not None:
        _draw_head(canvas, head, cam, zmin, zmax)

    if flat.shape[0]:
        sx, sy, z = _project(flat, cam)
        shade = _shade(z, zmin, zmax)
        # consecutive-vertex segments, skipping strand boundaries
        counts = np.array([p.shape[0] for p in all_pts])
        ends = np.cumsum(counts)
        a_idx = np.concatenate([np.arange(e - c, e - 1) for c, e in zip(counts, ends)
                                if c >= 2] or [np.zeros(0, np.int64)]).astype(np.int64)
        if a_idx.size:
            b_idx = a_idx + 1
            seg_ok = (z[a_idx] > _NEAR) & (z[b_idx] > _NEAR)
            a_idx, b_idx = a_idx[seg_ok], b_idx[seg_ok]
        if a_idx.size:
            x0, y0, x1, y1 = sx[a_idx], sy[a_idx], sx[b_idx], sy[b_idx]
            length = np.hypot(x1 - x0, y1 - y0)
            nsamp = np.maximum(np.ceil(length / _SAMPLE_SPACING).astype(np.int64) + 1, 2)
            total = int(nsamp.sum())
            seg_of = np.repeat(np.arange(a_idx.size), nsamp)
            offsets = np.concatenate([[0], np.cumsum(nsamp)[:-1]])
            within = np.arange(total) - offsets[seg_of]
            t = within / (nsamp[seg_of] - 1)
            px = x0[seg_of] + t * (x1 - x0)[seg_of]
            py = y0[seg_of] + t * (y1 - y0)[seg_of]
            val = shade[a_idx][seg_of] + t * (shade[b_idx] - shade[a_idx])[seg_of]
            _splat_max(canvas, px, py, val)

    data = np.clip(np.rint(canvas * 255.0), 0, 255).astype(np.uint8)
    return GrayImage(width=cam.width, height=cam.height, data=data)
