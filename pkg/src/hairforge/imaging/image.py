"""Grayscale image and edge-map containers plus PNG interchange.

PNG is the only raster format crossing a process boundary. Pixel data
lives in row-major uint8 numpy arrays; EdgeMap additionally restricts
values to {0, 255}.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..errors import EmptyImage


def _as_pixels(data, width, height):
    arr = np.ascontiguousarray(np.asarray(data, np.uint8)).reshape(height, width)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class GrayImage:
    """Row-major 8-bit intensity image."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise EmptyImage(f"{self.width}x{self.height} image has no pixels")
        object.__setattr__(self, "data",
                           _as_pixels(self.data, self.width, self.height))

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr)
        if arr.ndim != 2 or arr.size == 0:
            raise EmptyImage(f"expected a non-empty 2-d array, got shape {arr.shape}")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)


@dataclass(frozen=True, slots=True)
class EdgeMap:
    """Binary image; every pixel is 0 or 255."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise EmptyImage(f"{self.width}x{self.height} edge map has no pixels")
        arr = _as_pixels(self.data, self.width, self.height)
        if not np.isin(arr, (0, 255)).all():
            raise ValueError("edge map values must be 0 or 255")
        object.__setattr__(self, "data", arr)

    @property
    def edge_pixel_count(self) -> int:
        return int(np.count_nonzero(self.data))


def encode_png(img) -> bytes:
    """Encode a GrayImage or EdgeMap as 8-bit grayscale PNG bytes."""
    buf = io.BytesIO()
    Image.fromarray(np.asarray(img.data, np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(blob: bytes) -> GrayImage:
    """Decode PNG bytes to a GrayImage, collapsing color to luminance."""
    with Image.open(io.BytesIO(blob)) as im:
        arr = np.asarray(im.convert("L"), np.uint8)
    return GrayImage.from_array(arr)
