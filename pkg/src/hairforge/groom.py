"""Interactive grooming on a live simulation: grab and trim.

Grabs are one-way clamped springs applied by the sim step; trims remove
particles and every spring touching them, then let ordinary steps play
out the force imbalance. Roots are never trimmed, so strand identity
survives even a full cut.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import EmptyGrab, NonUnitDirection, StaleHandle
from .sim.state import GrabRecord, SimState

_handle_counter = itertools.count(1)


@dataclass
class GrabHandle:
    """Client-side view of one grab; lives as long as its state record."""

    handle_id: int
    stiffness: float
    max_force: float
    active: bool = True
    _state: SimState = field(default=None, repr=False)

    @property
    def particle_ids(self) -> frozenset:
        rec = self._state.grabs.get(self.handle_id) if self._state else None
        if rec is None:
            return frozenset()
        return frozenset(int(i) for i in rec.ids)

    @property
    def target(self) -> Tuple[float, float, float]:
        rec = self._state.grabs.get(self.handle_id) if self._state else None
        if rec is None:
            raise StaleHandle(f"grab {self.handle_id} has no live particles")
        return (float(rec.target[0]), float(rec.target[1]), float(rec.target[2]))


@dataclass(frozen=True)
class TrimRegion:
    """One of three cut selectors; build via the classmethods.

    sphere matches strictly inside (radius 0 matches nothing);
    below_plane matches the open half-space the normal points away
    from; tail matches vertex indices >= first_removed_index on one
    strand. Roots are exempt from all three.
    """

    kind: str
    center: Optional[Tuple[float, float, float]] = None
    radius: float = 0.0
    point: Optional[Tuple[float, float, float]] = None
    normal: Optional[Tuple[float, float, float]] = None
    strand_id: int = -1
    first_removed_index: int = 0

    @classmethod
    def sphere(cls, center, radius: float) -> "TrimRegion":
        c = np.asarray(center, dtype=np.float64).reshape(3)
        radius = float(radius)
        if not np.isfinite(c).all() or not np.isfinite(radius) or radius < 0:
            raise ValueError("sphere needs a finite center and radius >= 0")
        return cls(kind="sphere", center=(float(c[0]), float(c[1]), float(c[2])),
                   radius=radius)

    @classmethod
    def below_plane(cls, point, normal) -> "TrimRegion":
        p = np.asarray(point, dtype=np.float64).reshape(3)
        n = np.asarray(normal, dtype=np.float64).reshape(3)
        if not np.isfinite(p).all() or not np.isfinite(n).all():
            raise ValueError("plane needs finite point and normal")
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-5:
            raise NonUnitDirection(f"plane normal norm {np.linalg.norm(n)}")
        return cls(kind="below_plane", point=(float(p[0]), float(p[1]), float(p[2])),
                   normal=(float(n[0]), float(n[1]), float(n[2])))

    @classmethod
    def tail(cls, strand_id: int, first_removed_index: int) -> "TrimRegion":
        if strand_id < 0 or first_removed_index < 0:
            raise ValueError("strand_id and first_removed_index must be >= 0")
        return cls(kind="tail", strand_id=int(strand_id),
                   first_removed_index=int(first_removed_index))


def _clip_ray_to_aabb(origin, direction, lo, hi) -> Optional[Tuple[float, float]]:
    """Parameter range [t0, t1] of the ray inside the box, or None."""
    t0, t1 = 0.0, np.inf
    for a in range(3):
        o, d = origin[a], direction[a]
        if abs(d) < 1e-12:
            if o < lo[a] or o > hi[a]:
                return None
            continue
        ta = (lo[a] - o) / d
        tb = (hi[a] - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
    if t1 < t0:
        return None
    return t0, t1


def begin_grab(state: SimState, ray, radius: float) -> GrabHandle:
    """Grab every free particle within radius of the ray inside the hair.

    The ray is clipped to the hair bounding box (inflated by radius);
    particle distance is measured to that segment. The handle's target
    starts at the selection centroid, so the initial added force is
    near zero.
    """
    origin = np.asarray(ray[0], dtype=np.float64).reshape(3)
    direction = np.asarray(ray[1], dtype=np.float64).reshape(3)
    if not np.isfinite(origin).all() or not np.isfinite(direction).all():
        raise ValueError("ray must be finite")
    if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-5:
        raise NonUnitDirection(f"ray direction norm {np.linalg.norm(direction)}")
    radius = float(radius)
    if not radius > 0:
        raise ValueError("radius must be positive")

    pos = state.pos.astype(np.float64)
    lo = pos.min(axis=0) - radius
    hi = pos.max(axis=0) + radius
    span = _clip_ray_to_aabb(origin, direction, lo, hi)
    if span is None:
        raise EmptyGrab("ray misses the hair bounding box")
    t0, t1 = span

    t = np.clip((pos - origin) @ direction, t0, t1)
    nearest = origin + t[:, None] * direction
    dist = np.linalg.norm(pos - nearest, axis=1)
    mask = (dist <= radius) & (state.inv_mass > 0.0)
    ids = np.nonzero(mask)[0].astype(np.int32)
    if ids.size == 0:
        raise EmptyGrab("no free particles within grab radius")

    centroid = pos[ids].mean(axis=0)
    cfg = state.config
    handle_id = next(_handle_counter)
    state.grabs[handle_id] = GrabRecord(
        ids=ids,
        target=centroid.copy(),
        stiffness=cfg.grab_stiffness,
        max_force=cfg.grab_max_force,
    )
    return GrabHandle(handle_id=handle_id, stiffness=cfg.grab_stiffness,
                      max_force=cfg.grab_max_force, active=True, _state=state)


def update_grab(state: SimState, handle: GrabHandle, new_target) -> SimState:
    """Move the grab target; subsequent steps pull the held particles."""
    if not handle.active:
        raise StaleHandle(f"grab {handle.handle_id} was released")
    rec = state.grabs.get(handle.handle_id)
    if rec is None:
        handle.active = False
        raise StaleHandle(f"grab {handle.handle_id} lost all particles to trims")
    target = np.asarray(new_target, dtype=np.float64).reshape(3)
    if not np.isfinite(target).all():
        raise ValueError("target must be finite")
    rec.target = target
    return state


def release_grab(state: SimState, handle: GrabHandle) -> SimState:
    """Drop the grab force; particles keep their current motion."""
    state.grabs.pop(handle.handle_id, None)
    handle.active = False
    return state


def trim(state: SimState, region: TrimRegion) -> Tuple[SimState, int]:
    """Remove the selected particles (roots exempt) and their springs.

    Returns (state, removed_count). Velocities of survivors are
    untouched; the force imbalance from missing springs plays out in
    subsequent steps. Cutting mid-strand leaves a rootless fragment
    that keeps simulating until garbage-collected.
    """
    n = state.particle_count
    if region.kind == "sphere":
        if region.radius == 0.0:
            return state, 0
        d = state.pos.astype(np.float64) - np.asarray(region.center)
        mask = np.einsum("ij,ij->i", d, d) < region.radius * region.radius
    elif region.kind == "below_plane":
        d = state.pos.astype(np.float64) - np.asarray(region.point)
        mask = d @ np.asarray(region.normal) < 0.0
    elif region.kind == "tail":
        mask = (state.strand_ids == region.strand_id) & \
               (state.index_in_strand >= region.first_removed_index)
    else:
        raise ValueError(f"unknown trim selector {region.kind!r}")

    mask &= state.index_in_strand != 0
    removed = state.remove_particles(mask)
    assert state.particle_count == n - removed
    return state, removed


def gc_escaped(state: SimState, bound: float = 200.0) -> int:
    """Drop rootless fragments that left the simulation domain.

    The domain is the axis-aligned box of half-extent `bound` centered
    on the head. A fragment is collected only when every one of its
    particles is outside, so partially visible fragments keep moving.
    Returns the number of particles removed.
    """
    if state.particle_count == 0:
        return 0
    center = np.asarray(state.head_trans, dtype=np.float64)
    outside = np.abs(state.pos.astype(np.float64) - center).max(axis=1) > bound
    mask = np.zeros(state.particle_count, dtype=bool)
    for start, count in state.entry_runs():
        if state.index_in_strand[start] == 0:
            continue
        run = slice(start, start + count)
        if outside[run].all():
            mask[run] = True
    if not mask.any():
        return 0
    return state.remove_particles(mask)
