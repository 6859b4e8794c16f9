"""Procedural test and demo assets: a head mesh and a small styled database.

The shipped database stands in for a proprietary artist library; twelve
styles span the usual straight/wavy/curly/coily type range. Captions are
authored so the standard demo prompts rank their intended style first
under the fallback embedding provider.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .assets import write_hairstyle, write_sidecar
from .growth import GrowthParams, grow_region
from .model import HeadMesh, Hairstyle, PaintSelection, Strand

HEAD_RX = 7.5
HEAD_RY = 9.0
HEAD_RZ = 8.0


def make_head_mesh(stacks: int = 24, slices: int = 32) -> HeadMesh:
    """Watertight ellipsoid head, scalp top at (0, HEAD_RY, 0).

    Lat-long tessellation: >= 1k triangles at the default resolution.
    Normals are the exact ellipsoid gradient. Collision proxies are a
    column of inscribed spheres plus two lateral rings.
    """
    verts = [(0.0, HEAD_RY, 0.0)]
    normals = [(0.0, 1.0, 0.0)]
    for i in range(1, stacks):
        theta = math.pi * i / stacks
        y = HEAD_RY * math.cos(theta)
        s = math.sin(theta)
        for j in range(slices):
            phi = 2.0 * math.pi * j / slices
            x = HEAD_RX * s * math.cos(phi)
            z = HEAD_RZ * s * math.sin(phi)
            verts.append((x, y, z))
            n = np.array([x / HEAD_RX**2, y / HEAD_RY**2, z / HEAD_RZ**2])
            n /= np.linalg.norm(n)
            normals.append(tuple(n))
    verts.append((0.0, -HEAD_RY, 0.0))
    normals.append((0.0, -1.0, 0.0))
    bottom = len(verts) - 1

    tris = []
    for j in range(slices):
        tris.append((0, 1 + j, 1 + (j + 1) % slices))
    for i in range(stacks - 2):
        row0 = 1 + i * slices
        row1 = row0 + slices
        for j in range(slices):
            j1 = (j + 1) % slices
            tris.append((row0 + j, row1 + j, row0 + j1))
            tris.append((row0 + j1, row1 + j, row1 + j1))
    last = 1 + (stacks - 2) * slices
    for j in range(slices):
        tris.append((last + j, bottom, last + (j + 1) % slices))

    proxies = []
    for y in np.linspace(-0.75 * HEAD_RY, 0.75 * HEAD_RY, 12):
        s = math.sqrt(max(0.0, 1.0 - (y / HEAD_RY) ** 2))
        # Inscribed radius is limited laterally by the waist and
        # vertically by the distance to the nearer pole.
        r = 0.92 * min(s * min(HEAD_RX, HEAD_RZ), HEAD_RY - abs(y))
        if r > 0.8:
            proxies.append((0.0, y, 0.0, r))
    for ring_y, shrink in ((0.25 * HEAD_RY, 0.80), (-0.2 * HEAD_RY, 0.85)):
        s = math.sqrt(max(0.0, 1.0 - (ring_y / HEAD_RY) ** 2))
        for j in range(12):
            phi = 2.0 * math.pi * j / 12
            cx = shrink * HEAD_RX * s * math.cos(phi) * 0.75
            cz = shrink * HEAD_RZ * s * math.sin(phi) * 0.75
            proxies.append((cx, ring_y, cz, 0.22 * min(HEAD_RX, HEAD_RZ) * s + 0.8))
    return HeadMesh(vertices=verts, triangles=tris, vertex_normals=normals,
                    collision_proxies=proxies)


def scalp_selection(mesh: HeadMesh, min_y: float = 0.35 * HEAD_RY) -> PaintSelection:
    """Triangles whose centroid sits on the upper head."""
    cent = mesh.vertices[mesh.triangles].mean(axis=1)
    ids = np.nonzero(cent[:, 1] > min_y)[0]
    return PaintSelection(triangle_ids=frozenset(int(i) for i in ids))


def chin_selection(mesh: HeadMesh) -> PaintSelection:
    """Lower-front triangles, a beard region."""
    cent = mesh.vertices[mesh.triangles].mean(axis=1)
    ids = np.nonzero((cent[:, 1] < -0.25 * HEAD_RY) & (cent[:, 2] > 0.3 * HEAD_RZ))[0]
    return PaintSelection(triangle_ids=frozenset(int(i) for i in ids))


# (id, caption, strand_count, params). Captions keep the demo prompt
# tokens unique to their intended entry.
_STYLE_TABLE = (
    ("bob_short", "short bob, blunt chin length cut, sleek and tidy",
     1400, GrowthParams(p_gravity=0.030, p_spiral=0.12, p_helix_radius=0.06,
                        p_freq=0.9, steps=15, segment_scale=0.42)),
    ("wavy_medium", "medium wavy hair, shoulder length with soft waves",
     1500, GrowthParams(p_gravity=0.028, p_spiral=0.22, p_helix_radius=0.35,
                        p_freq=0.8, steps=18, segment_scale=0.48)),
    ("curly_long", "long curly hair, voluminous ringlets past the shoulders",
     1600, GrowthParams(p_gravity=0.022, p_spiral=0.30, p_helix_radius=0.8,
                        p_freq=1.6, steps=22, segment_scale=0.45)),
    ("pixie", "pixie crop, very short layered top with cropped sides",
     1100, GrowthParams(p_gravity=0.020, p_spiral=0.10, p_helix_radius=0.05,
                        p_freq=1.0, steps=9, segment_scale=0.38)),
    ("straight_long", "long straight hair, smooth and flat to the waist",
     1500, GrowthParams(p_gravity=0.034, p_spiral=0.05, p_helix_radius=0.02,
                        p_freq=0.7, steps=24, segment_scale=0.5)),
    ("afro", "afro, dense kinky coils forming a rounded halo",
     1800, GrowthParams(p_gravity=0.008, p_spiral=0.34, p_helix_radius=1.1,
                        p_freq=2.4, steps=16, segment_scale=0.3)),
    ("coily_tight", "tight coily spirals, springy corkscrew texture",
     1500, GrowthParams(p_gravity=0.012, p_spiral=0.32, p_helix_radius=0.9,
                        p_freq=2.1, steps=18, segment_scale=0.33)),
    ("ponytail_high", "high ponytail, hair gathered up and back",
     1300, GrowthParams(p_gravity=0.040, p_spiral=0.10, p_helix_radius=0.12,
                        p_freq=0.9, steps=20, segment_scale=0.45)),
    ("braids_box", "box braids, long parted plaits with even sections",
     1200, GrowthParams(p_gravity=0.030, p_spiral=0.16, p_helix_radius=0.25,
                        p_freq=1.9, steps=21, segment_scale=0.44)),
    ("buzz", "buzz cut, uniform cropped fuzz over the scalp",
     2000, GrowthParams(p_gravity=0.004, p_spiral=0.06, p_helix_radius=0.03,
                        p_freq=1.0, steps=4, segment_scale=0.3)),
    ("shag_layered", "shaggy layered cut with feathered face framing fringe",
     1400, GrowthParams(p_gravity=0.026, p_spiral=0.2, p_helix_radius=0.3,
                        p_freq=1.2, steps=16, segment_scale=0.44)),
    ("dreadlocks", "dreadlocks, rope like locs falling heavy and loose",
     1200, GrowthParams(p_gravity=0.03, p_spiral=0.14, p_helix_radius=0.2,
                        p_freq=1.4, steps=22, segment_scale=0.46)),
)

FIXTURE_IDS = tuple(row[0] for row in _STYLE_TABLE)


def make_style(style_id: str, mesh: HeadMesh | None = None, seed: int = 0,
               strand_scale: float = 1.0) -> Hairstyle:
    """Grow one named fixture style."""
    mesh = mesh or make_head_mesh()
    for sid, caption, count, params in _STYLE_TABLE:
        if sid == style_id:
            sel = scalp_selection(mesh)
            strands = grow_region(mesh, sel, params,
                                  max(1, int(count * strand_scale)),
                                  rng_seed=seed + hash_stable(sid))
            return Hairstyle(id=sid, strands=strands, caption=caption,
                             source="procedural")
    raise KeyError(style_id)


def hash_stable(text: str) -> int:
    acc = 0
    for ch in text.encode("utf-8"):
        acc = (acc * 131 + ch) % (2**31)
    return acc


def make_fixture_database(directory, mesh: HeadMesh | None = None, seed: int = 0,
                          strand_scale: float = 1.0) -> list:
    """Write the twelve-style database into a directory; returns the styles."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mesh = mesh or make_head_mesh()
    styles = []
    for sid, caption, _, _ in _STYLE_TABLE:
        style = make_style(sid, mesh, seed=seed, strand_scale=strand_scale)
        write_hairstyle(style, directory / f"{sid}.hair")
        write_sidecar(sid, caption, directory / f"{sid}.json")
        styles.append(style)
    return styles


def bare_mesh() -> HeadMesh:
    """Minimal proxy-free head, for tests that want no collisions."""
    return HeadMesh(vertices=[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)],
                    triangles=[(0, 1, 2)],
                    vertex_normals=[(0.0, 0.0, 1.0)] * 3,
                    collision_proxies=np.zeros((0, 4)))


def pendulum_style(length: float = 1.0) -> Hairstyle:
    """Two-vertex strand hanging straight down from the origin."""
    strand_verts = np.array([[0.0, 0.0, 0.0], [0.0, -length, 0.0]])
    return Hairstyle(id="pendulum", strands=[Strand(strand_verts)],
                     source="procedural")


def rest_pose_style(strands: int = 16, vertices: int = 8,
                    spacing: float = 0.8) -> Hairstyle:
    """Straight vertical strands far from the head, float32-exact geometry."""
    out = []
    for i in range(strands):
        x = np.float32(40.0 + 2.0 * i)
        verts = [(float(x), float(np.float32(-spacing * j)), 0.0)
                 for j in range(vertices)]
        out.append(Strand(np.asarray(verts, np.float64)))
    return Hairstyle(id="rest_pose", strands=out, source="procedural")
