"""Core domain types shared by every module.

Value types only; construction validates, nothing else mutates. All
geometry is centimeters, Y-up, head centered at the origin with the
scalp top near y = +9.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SOURCES = ("database", "groomed", "procedural")


def _frozen_array(data, dtype, shape_tail):
    arr = np.ascontiguousarray(np.asarray(data, dtype=dtype))
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape((0,) + shape_tail)
    if arr.ndim != 1 + len(shape_tail) or arr.shape[1:] != shape_tail:
        raise ValueError(f"expected shape (*, {shape_tail}), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class Strand:
    """Polyline of one hair fiber; vertex 0 is the scalp root."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen_array(self.vertices, np.float64, (3,)))

    @property
    def root_index(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.vertices.shape[0]


@dataclass(frozen=True, slots=True)
class Hairstyle:
    """A named set of strands with its retrieval caption.

    Captions beyond 60 words are a convention violation, not an error;
    the database loader only warns.
    """

    id: str
    strands: tuple
    caption: str = ""
    source: str = "database"

    def __post_init__(self):
        object.__setattr__(self, "strands", tuple(self.strands))
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}")

    @property
    def strand_count(self) -> int:
        return len(self.strands)


@dataclass(frozen=True, slots=True)
class HeadMesh:
    """Watertight head geometry plus its sphere collision proxies.

    collision_proxies is an (P, 4) array of (cx, cy, cz, radius).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_normals: np.ndarray
    collision_proxies: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen_array(self.vertices, np.float64, (3,)))
        object.__setattr__(self, "triangles", _frozen_array(self.triangles, np.int32, (3,)))
        object.__setattr__(self, "vertex_normals",
                           _frozen_array(self.vertex_normals, np.float64, (3,)))
        proxies = np.ascontiguousarray(np.asarray(self.collision_proxies, np.float64))
        if proxies.size == 0:
            proxies = proxies.reshape(0, 4)
        if proxies.ndim != 2 or proxies.shape[1] != 4:
            raise ValueError("collision_proxies must be (P, 4)")
        proxies.setflags(write=False)
        object.__setattr__(self, "collision_proxies", proxies)

        nv = self.vertices.shape[0]
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= nv):
            raise ValueError("triangle index out of range")
        if self.vertex_normals.shape[0] != nv:
            raise ValueError("one normal per vertex required")
        if nv:
            norms = np.linalg.norm(self.vertex_normals, axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-5):
                raise ValueError("vertex normals must be unit length within 1e-5")
        if proxies.shape[0] and nv:
            lo = self.vertices.min(axis=0)
            hi = self.vertices.max(axis=0)
            pad = 0.10 * (hi - lo)
            lo = lo - pad
            hi = hi + pad
            c = proxies[:, :3]
            r = proxies[:, 3:4]
            if np.any(c - r < lo) or np.any(c + r > hi):
                raise ValueError("collision proxy escapes inflated mesh bounding box")

    def triangle_areas(self) -> np.ndarray:
        a = self.vertices[self.triangles[:, 0]]
        b = self.vertices[self.triangles[:, 1]]
        c = self.vertices[self.triangles[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


@dataclass(frozen=True, slots=True)
class PaintSelection:
    """Set of head triangles to grow on, with target strand density."""

    triangle_ids: frozenset
    density: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "triangle_ids", frozenset(int(i) for i in self.triangle_ids))
        if self.density <= 0:
            raise ValueError("density must be positive")


@dataclass(frozen=True, slots=True)
class RenderAttributes:
    """Free-text prompt fields, composed in declaration order."""

    gender: str = ""
    hair_color: str = ""
    head_pose: str = ""
    misc: str = ""

    def fields_in_order(self):
        return (self.gender, self.hair_color, self.head_pose, self.misc)


@dataclass(frozen=True, slots=True)
class Violation:
    """One failed hairstyle rule; strand is None for style-level rules."""

    rule: str
    strand: int | None = None
    detail: str = ""


def validate_hairstyle(h: Hairstyle) -> list:
    """Check every type invariant; never raises.

    Returns
    -------
    list of Violation
        Empty iff the hairstyle is valid. Rules: "nonempty" (style has
        zero strands), "min_vertices" (a strand has zero vertices),
        "finite" (a strand contains NaN or Inf). Single-vertex strands
        are legal degenerate output and simulate as inert roots.
    """
    violations = []
    if h.strand_count == 0:
        violations.append(Violation(rule="nonempty"))
        return violations
    for i, s in enumerate(h.strands):
        if len(s) == 0:
            violations.append(Violation(rule="min_vertices", strand=i, detail="no vertices"))
            continue
        if not np.isfinite(s.vertices).all():
            violations.append(Violation(rule="finite", strand=i, detail="NaN or Inf coordinate"))
    return violations
