"""Viewport capture, edge extraction, prompt composition, and the
generation-service client."""

from .canny import canny
from .client import (GenerationClient, GenerationRequest, ImageResult,
                     request_generation)
from .image import EdgeMap, GrayImage, decode_png, encode_png
from .prompt import compose_prompt
from .raster import Camera, rasterize_strands

__all__ = [
    "Camera",
    "EdgeMap",
    "GenerationClient",
    "GenerationRequest",
    "GrayImage",
    "ImageResult",
    "canny",
    "compose_prompt",
    "decode_png",
    "encode_png",
    "rasterize_strands",
    "request_generation",
]
