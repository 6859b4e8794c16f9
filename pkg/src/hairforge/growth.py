"""Procedural strand growth and root sampling on painted scalp regions.

The recursion grows a strand from a root and an initial direction in T
steps. Directions are never normalized, so gravity accumulates into
segment length; segment_scale only rescales the emitted vertices and
never enters the recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptySelection, NonFiniteInput
from .model import HeadMesh, PaintSelection, Strand


@dataclass(frozen=True, slots=True)
class GrowthParams:
    """The five growth controls plus step count and output scaling.

    p_gamma_cap, p_spiral, p_freq defaults follow the published sweep
    configuration; p_gravity and p_helix_radius have no published
    defaults and ship as repository configuration.
    """

    p_gamma_cap: float = 0.2
    p_gravity: float = 0.05
    p_spiral: float = 0.3
    p_helix_radius: float = 0.5
    p_freq: float = 1.0
    steps: int = 16
    segment_scale: float = 1.0
    perturbation_scale: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.p_gamma_cap <= 1.0:
            raise ValueError("p_gamma_cap must lie in [0, 1]")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.segment_scale <= 0.0:
            raise ValueError("segment_scale must be positive")


@dataclass(frozen=True, slots=True)
class GrowthCursor:
    """Per-step intermediates; grav and helix are recomputable from (step, params)."""

    step: int
    dir: tuple
    grav: tuple
    helix: tuple
    perturbation: tuple = (0.0, 0.0, 0.0)


def gravity_at(i: int, params: GrowthParams) -> tuple:
    """grav vector at step i; the zero vector at i = 0."""
    return (0.0, -i * params.p_gravity, 0.0)


def helix_at(i: int, params: GrowthParams) -> tuple:
    """Helix target at step i."""
    return (params.p_helix_radius * math.cos(i * params.p_freq),
            1.0,
            params.p_helix_radius * math.sin(i * params.p_freq))


def grow_strand(root, dir0, params: GrowthParams, cursors: list | None = None) -> Strand:
    """Grow one strand of params.steps + 1 vertices.

    Parameters
    ----------
    root : (3,) array-like
        Scalp position of vertex 0, centimeters.
    dir0 : (3,) array-like
        Initial growth direction; finite and nonzero.
    params : GrowthParams
    cursors : list, optional
        When given, receives one GrowthCursor per step for introspection.

    Returns
    -------
    Strand

    Raises
    ------
    NonFiniteInput
        If root or dir0 contain NaN or Inf.
    """
    root = np.asarray(root, dtype=np.float64).reshape(3)
    dir0 = np.asarray(dir0, dtype=np.float64).reshape(3)
    if not (np.isfinite(root).all() and np.isfinite(dir0).all()):
        raise NonFiniteInput("root and dir0 must be finite")
    if not dir0.any():
        raise ValueError("dir0 must be nonzero")

    scale = params.segment_scale
    vx, vy, vz = float(root[0]), float(root[1]), float(root[2])
    dx, dy, dz = float(dir0[0]), float(dir0[1]), float(dir0[2])
    verts = np.empty((params.steps + 1, 3), dtype=np.float64)
    verts[0] = (vx, vy, vz)
    for i in range(1, params.steps + 1):
        gy_prev = -(i - 1) * params.p_gravity
        cap = max(params.p_gamma_cap, 1.0 - abs(dy))
        px = dx
        py = dy + gy_prev * cap
        pz = dz
        hx, hy, hz = helix_at(i, params)
        dx = px + params.p_spiral * (px - hx)
        dy = py + params.p_spiral * (py - hy)
        dz = pz + params.p_spiral * (pz - hz)
        vx += scale * dx
        vy += scale * dy
        vz += scale * dz
        verts[i] = (vx, vy, vz)
        if cursors is not None:
            cursors.append(GrowthCursor(step=i, dir=(dx, dy, dz),
                                        grav=gravity_at(i, params),
                                        helix=(hx, hy, hz)))
    return Strand(vertices=verts)


def sample_root(mesh: HeadMesh, sel: PaintSelection, rng_seed,
                perturbation_scale: float = 0.1):
    """Sample one root on the painted region.

    Triangle chosen with probability proportional to area; position by
    uniform barycentric sampling; direction is the barycentric blend of
    vertex normals plus a uniform perturbation delta in (-1, 1)^3 scaled
    by perturbation_scale. Draw order is fixed: triangle pick, two
    barycentric uniforms, three delta components.

    rng_seed may be an integer or a numpy Generator (tests force draws
    through a stub generator).

    Returns
    -------
    (root, dir0, triangle_id)

    Raises
    ------
    EmptySelection
        If the selection has no triangles.
    """
    if not sel.triangle_ids:
        raise EmptySelection("paint selection is empty")
    # ints become a fresh generator; anything else is used as one, so tests
    # can force draws through a stub
    rng = np.random.default_rng(rng_seed) \
        if isinstance(rng_seed, (int, np.integer)) else rng_seed

    tri_ids = np.array(sorted(sel.triangle_ids), dtype=np.int64)
    # negative ids would wrap through numpy indexing and grow from the
    # wrong triangle, so both ends are rejected here
    if tri_ids[0] < 0 or tri_ids[-1] >= len(mesh.triangles):
        raise ValueError(
            f"triangle ids must lie in [0, {len(mesh.triangles)})")
    areas = mesh.triangle_areas()[tri_ids]
    cum = np.cumsum(areas)
    u = rng.random() * cum[-1]
    pick = int(np.searchsorted(cum, u, side="right"))
    pick = min(pick, len(tri_ids) - 1)
    tri = int(tri_ids[pick])

    u1 = rng.random()
    u2 = rng.random()
    if u1 + u2 > 1.0:
        u1 = 1.0 - u1
        u2 = 1.0 - u2
    b0 = 1.0 - u1 - u2
    ia, ib, ic = mesh.triangles[tri]
    root = b0 * mesh.vertices[ia] + u1 * mesh.vertices[ib] + u2 * mesh.vertices[ic]
    normal = (b0 * mesh.vertex_normals[ia] + u1 * mesh.vertex_normals[ib]
              + u2 * mesh.vertex_normals[ic])
    delta = rng.uniform(-1.0, 1.0, 3) * perturbation_scale
    return root, normal + delta, tri


def grow_region(mesh: HeadMesh, sel: PaintSelection, params: GrowthParams,
                count: int, rng_seed: int) -> list:
    """Grow count strands on the selection, bit-repeatable for a seed.

    Strand k draws from a sub-generator seeded by (rng_seed, k), so the
    output is independent of iteration strategy.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    strands = []
    for k in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, k)))
        root, dir0, _ = sample_root(mesh, sel, rng,
                                    perturbation_scale=params.perturbation_scale)
        strands.append(grow_strand(root, dir0, params))
    return strands


def sweep_grid(root, dir0, base: GrowthParams, p_h_values, p_gravity_values) -> list:
    """Grow the (p_helix_radius x p_gravity) parameter grid.

    Returns rows indexed by p_h_values, columns by p_gravity_values.
    """
    if not len(p_h_values) or not len(p_gravity_values):
        raise ValueError("sweep value lists must be non-empty")
    grid = []
    for ph in p_h_values:
        row = []
        for pg in p_gravity_values:
            p = replace(base, p_helix_radius=float(ph), p_gravity=float(pg))
            row.append(grow_strand(root, dir0, p))
        grid.append(row)
    return grid
