"""Build and advance the strand simulation.

step() advances exactly one substep of at most cfg.dt; callers that
want a display frame run cfg.substeps of them (step_frame). On blowup
the state is restored to the entry of the failing substep before
NumericalBlowup is raised, so a paused session resumes from healthy
positions.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np

from ..errors import InvalidHairstyle, NonRigidTransform, NonUnitDirection, NumericalBlowup
from ..model import Hairstyle, HeadMesh, Strand, validate_hairstyle
from . import kernels
from .config import SimConfig, WindField
from .state import GrabRecord, SimState

_GRID_MAX_AXIS = 381.0
_GRID_MAX_CELLS = 2_000_000


def build_sim(h: Hairstyle, head: HeadMesh, cfg: Optional[SimConfig] = None) -> SimState:
    """Discretize a hairstyle into particles and springs, rest pose as-is.

    Per strand of n vertices: n particles (root pinned), n-1 edge,
    max(0, n-2) bend, max(0, n-3) torsion springs, then n-1 aug_local
    (toward the parent-anchored rest offset) and n-1 aug_global springs
    (toward the root-anchored rest offset). Spring order is the force
    accumulation order and therefore part of determinism.
    """
    cfg = cfg or SimConfig()
    violations = validate_hairstyle(h)
    if violations:
        raise InvalidHairstyle(violations)

    counts = [len(s) for s in h.strands]
    n_particles = int(sum(counts))
    pos = np.empty((n_particles, 3), dtype=np.float32)
    strand_ids = np.empty(n_particles, dtype=np.int32)
    index_in_strand = np.empty(n_particles, dtype=np.int32)
    root_of = np.empty(n_particles, dtype=np.int32)
    inv_mass = np.empty(n_particles, dtype=np.float32)

    n_springs = sum(
        (n - 1) + max(0, n - 2) + max(0, n - 3) + 2 * (n - 1) for n in counts
    )
    sp_kind = np.empty(n_springs, dtype=np.int8)
    sp_a = np.empty(n_springs, dtype=np.int32)
    sp_b = np.empty(n_springs, dtype=np.int32)
    sp_k = np.empty(n_springs, dtype=np.float32)
    sp_c = np.empty(n_springs, dtype=np.float32)

    inv_m = np.float32(1.0 / cfg.particle_mass)
    p0 = 0
    s0 = 0
    for sid, strand in enumerate(h.strands):
        n = counts[sid]
        pos[p0:p0 + n] = strand.vertices.astype(np.float32)
        strand_ids[p0:p0 + n] = sid
        index_in_strand[p0:p0 + n] = np.arange(n, dtype=np.int32)
        root_of[p0:p0 + n] = p0
        inv_mass[p0] = 0.0
        inv_mass[p0 + 1:p0 + n] = inv_m

        for kind, gap, k, c in (
            (kernels.KIND_EDGE, 1, cfg.k_edge, cfg.c_edge),
            (kernels.KIND_BEND, 2, cfg.k_bend, cfg.c_bend),
            (kernels.KIND_TORSION, 3, cfg.k_torsion, cfg.c_torsion),
        ):
            m = max(0, n - gap)
            sl = slice(s0, s0 + m)
            sp_kind[sl] = kind
            sp_a[sl] = p0 + np.arange(m, dtype=np.int32)
            sp_b[sl] = p0 + np.arange(m, dtype=np.int32) + gap
            sp_k[sl] = k
            sp_c[sl] = c
            s0 += m

        m = n - 1
        sl = slice(s0, s0 + m)
        sp_kind[sl] = kernels.KIND_AUG_LOCAL
        sp_a[sl] = p0 + 1 + np.arange(m, dtype=np.int32)
        sp_b[sl] = p0 + np.arange(m, dtype=np.int32)
        sp_k[sl] = cfg.k_aug_local
        sp_c[sl] = cfg.c_aug_local
        s0 += m

        sl = slice(s0, s0 + m)
        sp_kind[sl] = kernels.KIND_AUG_GLOBAL
        sp_a[sl] = p0 + 1 + np.arange(m, dtype=np.int32)
        sp_b[sl] = p0
        sp_k[sl] = cfg.k_aug_global
        sp_c[sl] = cfg.c_aug_global
        s0 += m

        p0 += n

    rest_pos = pos.copy()
    sp_rest = np.empty(n_springs, dtype=np.float32)
    if n_springs:
        kernels.rest_lengths(rest_pos, sp_a, sp_b, sp_rest)
    # Offsets feed the aug target pos_b + R @ (rest_a - rest_b); float32
    # subtraction here mirrors the kernel so the rest pose is an exact
    # fixed point under the identity transform.
    sp_off = np.zeros((n_springs, 3), dtype=np.float32)
    aug = sp_kind >= kernels.KIND_AUG_LOCAL
    sp_off[aug] = rest_pos[sp_a[aug]] - rest_pos[sp_b[aug]]

    proxies_rest = np.ascontiguousarray(head.collision_proxies, dtype=np.float64)
    state = SimState(
        pos=pos,
        vel=np.zeros((n_particles, 3), dtype=np.float32),
        inv_mass=inv_mass,
        rest_pos=rest_pos,
        strand_ids=strand_ids,
        index_in_strand=index_in_strand,
        root_of=root_of,
        sp_kind=sp_kind,
        sp_a=sp_a,
        sp_b=sp_b,
        sp_rest=sp_rest,
        sp_k=sp_k,
        sp_c=sp_c,
        sp_off=sp_off,
        head_rot=np.eye(3, dtype=np.float64),
        head_trans=np.zeros(3, dtype=np.float64),
        proxies_rest=proxies_rest,
        proxies_world=proxies_rest.copy(),
        config=cfg,
    )
    state.refresh_collision_bounds()
    return state


def _grid_layout(aabb: Tuple[float, ...], base_cell: float):
    minx, miny, minz, maxx, maxy, maxz = aabb
    cell = float(base_cell)
    biggest = max(maxx - minx, maxy - miny, maxz - minz)
    if biggest / cell > _GRID_MAX_AXIS:
        cell = biggest / _GRID_MAX_AXIS
    for _ in range(4):
        inv = 1.0 / cell
        ox = minx - cell
        oy = miny - cell
        oz = minz - cell
        dx = int(math.ceil((maxx - ox) * inv)) + 2
        dy = int(math.ceil((maxy - oy) * inv)) + 2
        dz = int(math.ceil((maxz - oz) * inv)) + 2
        if dx * dy * dz <= _GRID_MAX_CELLS:
            break
        cell *= (dx * dy * dz / _GRID_MAX_CELLS) ** (1.0 / 3.0) * 1.01
    return ox, oy, oz, cell, inv, dx, dy, dz


def _grid_buffers(state: SimState, ncells: int):
    if state._grid_mom is None or state._grid_mom.shape[0] < ncells:
        cap = ncells + ncells // 4 + 64
        state._grid_mom = np.zeros((cap, 3), dtype=np.float64)
        state._grid_mass = np.zeros(cap, dtype=np.float64)
        state._grid_vel = np.zeros((cap, 3), dtype=np.float64)
    mom = state._grid_mom[:ncells]
    mass = state._grid_mass[:ncells]
    vel_grid = state._grid_vel[:ncells]
    mom[:] = 0.0
    mass[:] = 0.0
    return mom, mass, vel_grid


def _rot32(state: SimState) -> np.ndarray:
    if state._rot32 is None:
        state._rot32 = state.head_rot.astype(np.float32)
    return state._rot32


def step(state: SimState, cfg: Optional[SimConfig] = None, dt: Optional[float] = None) -> SimState:
    """Advance one substep; mutates and returns the same state.

    Raises NumericalBlowup (state restored to substep entry) when any
    coordinate leaves [-1e6, 1e6] or turns non-finite.
    """
    cfg = cfg or state.config
    dt = cfg.dt if dt is None else float(dt)
    if dt <= 0 or dt > cfg.dt * (1.0 + 1e-9):
        raise ValueError("dt must lie in (0, cfg.dt]")

    state.save_backup()

    if state._force is None or state._force.shape != state.pos.shape:
        state._force = np.zeros_like(state.pos)
    force = state._force
    force[:] = 0.0

    if state.spring_count:
        kernels.spring_forces(
            state.pos, state.vel, force,
            state.sp_a, state.sp_b, state.sp_kind, state.sp_rest,
            state.sp_k, state.sp_c, state.sp_off,
            _rot32(state), cfg.biphasic_ratio,
        )
    for rec in state.grabs.values():
        kernels.grab_forces(
            state.pos, force, rec.ids,
            float(rec.target[0]), float(rec.target[1]), float(rec.target[2]),
            rec.stiffness, rec.max_force,
        )

    wind = state.wind
    if wind.enabled and wind.strength > 0.0:
        wv = wind.velocity_at(state.time)
        apply_wind = True
        drag = cfg.wind_drag * wind.strength
    else:
        wv = (0.0, 0.0, 0.0)
        apply_wind = False
        drag = 0.0

    gx, gy, gz = cfg.gravity
    damp_factor = 1.0 - cfg.global_damping * dt
    aabb = kernels.integrate(
        state.pos, state.vel, force, state.inv_mass, dt,
        gx, gy, gz, damp_factor,
        apply_wind, float(wv[0]), float(wv[1]), float(wv[2]), drag,
    )
    if aabb[6]:
        state.restore_backup()
        raise NumericalBlowup(
            f"coordinate non-finite or beyond 1e6 at step {state.step_count}",
            step_index=state.step_count,
        )

    ox, oy, oz, cell, inv, dx, dy, dz = _grid_layout(aabb[:6], cfg.grid_cell)
    mom, mass, vel_grid = _grid_buffers(state, dx * dy * dz)
    kernels.grid_scatter(state.pos, state.vel, cfg.particle_mass,
                         ox, oy, oz, inv, dx, dy, dz, mom, mass)
    kernels.grid_normalize(mom, mass, vel_grid)
    bcx, bcy, bcz, br2 = state.collision_bounds()
    kernels.blend_and_collide(
        state.pos, state.vel, state.inv_mass,
        ox, oy, oz, inv, dx, dy, dz, vel_grid, mass,
        cfg.grid_blend, cfg.repulsion_gain,
        state.proxies_world, state.proxies_world.shape[0],
        bcx, bcy, bcz, br2, cfg.collision_friction,
    )

    state.grid_origin = (ox, oy, oz)
    state.grid_dims = (dx, dy, dz)
    state.grid_cell = cell
    state.time += dt
    state.step_count += 1
    return state


def step_frame(state: SimState, cfg: Optional[SimConfig] = None) -> SimState:
    """Advance one display frame: cfg.substeps substeps of cfg.dt."""
    cfg = cfg or state.config
    for _ in range(cfg.substeps):
        step(state, cfg)
    return state


def set_wind(state: SimState, wind: WindField) -> SimState:
    d = np.asarray(wind.direction, dtype=np.float64)
    if wind.enabled and abs(float(np.linalg.norm(d)) - 1.0) > 1e-5:
        raise NonUnitDirection(f"wind direction norm {np.linalg.norm(d)}")
    state.wind = wind
    return state


def retune(state: SimState, cfg: SimConfig) -> SimState:
    """Re-derive spring stiffness/damping and masses from cfg in place.

    Positions, velocities, rest lengths, and topology are untouched, so
    parameters can change on a live simulation without a rebuild.
    """
    if cfg.particle_mass <= 0:
        raise ValueError("particle_mass must be positive")
    k_by_kind = np.array([cfg.k_edge, cfg.k_bend, cfg.k_torsion,
                          cfg.k_aug_local, cfg.k_aug_global], np.float32)
    c_by_kind = np.array([cfg.c_edge, cfg.c_bend, cfg.c_torsion,
                          cfg.c_aug_local, cfg.c_aug_global], np.float32)
    if state.spring_count:
        state.sp_k[:] = k_by_kind[state.sp_kind]
        state.sp_c[:] = c_by_kind[state.sp_kind]
    free = state.inv_mass > 0
    state.inv_mass[free] = np.float32(1.0 / cfg.particle_mass)
    state.config = cfg
    return state


def set_head_transform(state: SimState, rotation, translation) -> SimState:
    """Rigidly move the head: pinned roots, aug anchors, and proxies follow."""
    rot = np.asarray(rotation, dtype=np.float64)
    trans = np.asarray(translation, dtype=np.float64).reshape(3)
    if rot.shape != (3, 3) or not np.isfinite(rot).all() or not np.isfinite(trans).all():
        raise NonRigidTransform("rotation must be a finite 3x3 matrix")
    if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-5):
        raise NonRigidTransform("matrix is not orthonormal")
    if abs(float(np.linalg.det(rot)) - 1.0) > 1e-5:
        raise NonRigidTransform("determinant must be +1 (no reflection or scale)")

    state.head_rot = rot
    state.head_trans = trans
    state._rot32 = rot.astype(np.float32)

    pinned = state.inv_mass == 0.0
    if np.any(pinned):
        moved = state.rest_pos[pinned].astype(np.float64) @ rot.T + trans
        state.pos[pinned] = moved.astype(np.float32)
        state.vel[pinned] = 0.0

    if state.proxies_rest.shape[0]:
        world = state.proxies_rest.copy()
        world[:, :3] = state.proxies_rest[:, :3] @ rot.T + trans
        state.proxies_world = np.ascontiguousarray(world)
    state.refresh_collision_bounds()
    return state


def kinetic_energy(state: SimState, cfg: Optional[SimConfig] = None) -> float:
    """Total kinetic energy of free particles, g*cm^2/s^2."""
    cfg = cfg or state.config
    free = state.inv_mass > 0.0
    v = state.vel[free].astype(np.float64)
    return float(0.5 * cfg.particle_mass * np.sum(v * v))


def scatter_totals(state: SimState, cfg: Optional[SimConfig] = None) -> dict:
    """Momentum/mass sums before and after one grid scatter.

    Debug hook for conservation checks; does not mutate the state.
    """
    cfg = cfg or state.config
    pos64 = state.pos.astype(np.float64)
    lo = pos64.min(axis=0)
    hi = pos64.max(axis=0)
    aabb = (lo[0], lo[1], lo[2], hi[0], hi[1], hi[2])
    ox, oy, oz, cell, inv, dx, dy, dz = _grid_layout(aabb, cfg.grid_cell)
    mom = np.zeros((dx * dy * dz, 3), dtype=np.float64)
    mass = np.zeros(dx * dy * dz, dtype=np.float64)
    kernels.grid_scatter(state.pos, state.vel, cfg.particle_mass,
                         ox, oy, oz, inv, dx, dy, dz, mom, mass)
    p_mom = cfg.particle_mass * state.vel.astype(np.float64).sum(axis=0)
    return {
        "particle_momentum": p_mom,
        "grid_momentum": mom.sum(axis=0),
        "particle_mass": cfg.particle_mass * state.particle_count,
        "grid_mass": float(mass.sum()),
    }


def snapshot_style(state: SimState, style_id: str, source: str = "groomed") -> Hairstyle:
    """Current positions as a Hairstyle; trimmed fragments become strands."""
    runs = state.entry_runs()
    strands = [
        Strand(state.pos[start:start + count].astype(np.float64))
        for start, count in runs
    ]
    return Hairstyle(id=style_id, strands=tuple(strands), source=source)
