"""Multi-stage edge detector producing binary edge maps.

The numeric recipe is pinned so independent implementations agree
bit-exactly: IEEE double throughout; Gaussian taps accumulated in
ascending offset order with edge-clamped indexing; Sobel taps row-major
with zero-weight taps skipped; four-bucket direction quantization;
non-maximum suppression keeping a pixel iff it beats the previous
sample strictly and the next sample weakly; hysteresis as an
8-connected flood from strong pixels through weak ones.

Defaults (sigma 1.4, low 100, high 200) match common edge-conditioning
preprocessors so external generation backends see familiar maps.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import BadThresholds
from .image import EdgeMap, GrayImage

_TAN22 = math.tan(math.pi / 8.0)
_TAN67 = math.tan(3.0 * math.pi / 8.0)

# (weight, dy, dx) with zero-weight taps already dropped, row-major order
_SOBEL_X_TAPS = ((-1.0, -1, -1), (1.0, -1, 1),
                 (-2.0, 0, -1), (2.0, 0, 1),
                 (-1.0, 1, -1), (1.0, 1, 1))
_SOBEL_Y_TAPS = ((-1.0, -1, -1), (-2.0, -1, 0), (-1.0, -1, 1),
                 (1.0, 1, -1), (2.0, 1, 0), (1.0, 1, 1))

# gradient-direction step per quantization bucket: (dy, dx) toward "next"
_NMS_OFFSETS = ((0, 1), (1, 1), (1, 0), (1, -1))  # 0, 45, 90, 135 degrees


def _gauss_kernel(sigma: float):
    # scalar arithmetic mirrors the pinned recipe: sum accumulated in
    # ascending tap order, then each weight divided by that sum
    r = math.ceil(3.0 * sigma)
    w = [math.exp(-(j * j) / (2.0 * sigma * sigma)) for j in range(-r, r + 1)]
    s = 0.0
    for x in w:
        s += x
    return r, [x / s for x in w]


def _clamped_shift(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    h, w = img.shape
    rows = np.clip(np.arange(h) + dy, 0, h - 1)
    cols = np.clip(np.arange(w) + dx, 0, w - 1)
    return img[np.ix_(rows, cols)]


def _blur(img: np.ndarray, sigma: float) -> np.ndarray:
    h, w = img.shape
    r, k = _gauss_kernel(sigma)
    tmp = np.zeros_like(img)
    for j in range(-r, r + 1):
        cols = np.clip(np.arange(w) + j, 0, w - 1)
        tmp += k[j + r] * img[:, cols]
    out = np.zeros_like(img)
    for j in range(-r, r + 1):
        rows = np.clip(np.arange(h) + j, 0, h - 1)
        out += k[j + r] * tmp[rows, :]
    return out


def _sobel(img: np.ndarray, taps) -> np.ndarray:
    out = np.zeros_like(img)
    for kv, dy, dx in taps:
        out += kv * _clamped_shift(img, dy, dx)
    return out


def _hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Flood 8-connected from strong pixels through weak ones."""
    h, w = strong.shape
    lit = strong.copy()
    ys, xs = np.nonzero(strong)
    while ys.size:
        nys, nxs = [], []
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                ny = ys + dy
                nx = xs + dx
                ok = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
                ny, nx = ny[ok], nx[ok]
                fresh = weak[ny, nx] & ~lit[ny, nx]
                ny, nx = ny[fresh], nx[fresh]
                lit[ny, nx] = True
                nys.append(ny)
                nxs.append(nx)
        ys = np.concatenate(nys)
        xs = np.concatenate(nxs)
        if ys.size:
            # the same pixel can arrive from several directions in one wave
            flat = np.unique(ys.astype(np.int64) * w + xs.astype(np.int64))
            ys, xs = flat // w, flat % w
    return lit


def canny(img: GrayImage, sigma: float = 1.4,
          low: float = 100.0, high: float = 200.0) -> EdgeMap:
    """Detect edges; returns a binary map of the same size.

    Parameters
    ----------
    img : GrayImage
    sigma : float
        Gaussian blur width in pixels; kernel radius is ceil(3*sigma).
    low, high : float
        Double-threshold bounds on gradient magnitude, within [0, 255]
        and low < high.

    Raises
    ------
    BadThresholds
        Thresholds out of range or not strictly ordered.
    ValueError
        sigma is not positive.
    """
    if not (0.0 <= low < high <= 255.0):
        raise BadThresholds(f"need 0 <= low < high <= 255, got low={low} high={high}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")

    f = _blur(img.data.astype(np.float64), float(sigma))
    gx = _sobel(f, _SOBEL_X_TAPS)
    gy = _sobel(f, _SOBEL_Y_TAPS)
    mag = np.sqrt(gx * gx + gy * gy)

    ax = np.abs(gx)
    ay = np.abs(gy)
    b0 = ay <= ax * _TAN22
    b90 = ~b0 & (ay >= ax * _TAN67)
    b45 = ~b0 & ~b90 & (gx * gy > 0.0)
    b135 = ~b0 & ~b90 & ~b45

    keep = np.zeros(mag.shape, bool)
    for bucket, (dy, dx) in zip((b0, b45, b90, b135), _NMS_OFFSETS):
        nxt = _clamped_shift(mag, dy, dx)
        prv = _clamped_shift(mag, -dy, -dx)
        keep |= bucket & (mag > prv) & (mag >= nxt)

    strong = keep & (mag >= float(high))
    weak = keep & ~strong & (mag >= float(low))
    lit = _hysteresis(strong, weak)
    return EdgeMap(width=img.width, height=img.height,
                   data=np.where(lit, 255, 0).astype(np.uint8))
