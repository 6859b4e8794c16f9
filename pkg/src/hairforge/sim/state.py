"""Structure-of-arrays simulation state.

Particle state lives in float32 arrays indexed by a global particle id;
strands occupy contiguous index ranges in build order, so a strand (or
a trimmed fragment of one) is always a run of consecutive ids with
consecutive index_in_strand values. Springs are parallel arrays sorted
by construction order, which is the accumulation order the kernels are
required to preserve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .config import SimConfig, WindField

SPRING_KIND_NAMES = ("edge", "bend", "torsion", "aug_local", "aug_global")


@dataclass(frozen=True)
class ParticleView:
    """Read-only snapshot of one particle."""

    position: Tuple[float, float, float]
    velocity: Tuple[float, float, float]
    inv_mass: float
    strand_id: int
    index_in_strand: int


@dataclass(frozen=True)
class SpringView:
    """Read-only snapshot of one spring."""

    kind: str
    a: int
    b: int
    rest_length: float
    stiffness: float
    damping: float
    one_way: bool


@dataclass
class GrabRecord:
    """Particles held by one active grab and the point they are pulled to."""

    ids: np.ndarray
    target: np.ndarray
    stiffness: float
    max_force: float


@dataclass
class SimState:
    pos: np.ndarray
    vel: np.ndarray
    inv_mass: np.ndarray
    rest_pos: np.ndarray
    strand_ids: np.ndarray
    index_in_strand: np.ndarray
    root_of: np.ndarray
    sp_kind: np.ndarray
    sp_a: np.ndarray
    sp_b: np.ndarray
    sp_rest: np.ndarray
    sp_k: np.ndarray
    sp_c: np.ndarray
    sp_off: np.ndarray
    head_rot: np.ndarray
    head_trans: np.ndarray
    proxies_rest: np.ndarray
    proxies_world: np.ndarray
    config: SimConfig
    wind: WindField = field(default_factory=WindField)
    time: float = 0.0
    step_count: int = 0
    grabs: Dict[int, GrabRecord] = field(default_factory=dict)
    grid_origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    grid_dims: Tuple[int, int, int] = (0, 0, 0)
    grid_cell: float = 0.0
    _backup_pos: Optional[np.ndarray] = None
    _backup_vel: Optional[np.ndarray] = None
    _runs: Optional[np.ndarray] = None
    _bound_center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    _bound_r2: float = -1.0
    _force: Optional[np.ndarray] = None
    _rot32: Optional[np.ndarray] = None
    _grid_mom: Optional[np.ndarray] = None
    _grid_mass: Optional[np.ndarray] = None
    _grid_vel: Optional[np.ndarray] = None

    @property
    def particle_count(self) -> int:
        return int(self.pos.shape[0])

    @property
    def spring_count(self) -> int:
        return int(self.sp_a.shape[0])

    def particle(self, i: int) -> ParticleView:
        return ParticleView(
            position=tuple(float(c) for c in self.pos[i]),
            velocity=tuple(float(c) for c in self.vel[i]),
            inv_mass=float(self.inv_mass[i]),
            strand_id=int(self.strand_ids[i]),
            index_in_strand=int(self.index_in_strand[i]),
        )

    def spring(self, s: int) -> SpringView:
        kind = SPRING_KIND_NAMES[int(self.sp_kind[s])]
        return SpringView(
            kind=kind,
            a=int(self.sp_a[s]),
            b=int(self.sp_b[s]),
            rest_length=float(self.sp_rest[s]),
            stiffness=float(self.sp_k[s]),
            damping=float(self.sp_c[s]),
            one_way=kind in ("aug_local", "aug_global"),
        )

    def particles(self) -> Iterator[ParticleView]:
        return (self.particle(i) for i in range(self.particle_count))

    def springs(self) -> Iterator[SpringView]:
        return (self.spring(s) for s in range(self.spring_count))

    def spring_counts_by_kind(self) -> Dict[str, int]:
        out = {name: 0 for name in SPRING_KIND_NAMES}
        kinds, counts = np.unique(self.sp_kind, return_counts=True)
        for k, c in zip(kinds, counts):
            out[SPRING_KIND_NAMES[int(k)]] = int(c)
        return out

    def entry_runs(self) -> np.ndarray:
        """(R, 2) array of [start, count] for each contiguous vertex run.

        A run is a maximal span of particles sharing a strand id with
        consecutive index_in_strand values. Untrimmed states have one
        run per strand; trims split strands into fragments.
        """
        if self._runs is None:
            n = self.particle_count
            if n == 0:
                self._runs = np.zeros((0, 2), dtype=np.int64)
            else:
                sid = self.strand_ids
                idx = self.index_in_strand
                brk = (sid[1:] != sid[:-1]) | (idx[1:] != idx[:-1] + 1)
                starts = np.concatenate(([0], np.flatnonzero(brk) + 1))
                ends = np.concatenate((starts[1:], [n]))
                self._runs = np.stack(
                    (starts, ends - starts), axis=1
                ).astype(np.int64)
        return self._runs

    def mark_topology_dirty(self) -> None:
        self._runs = None

    def save_backup(self) -> None:
        if self._backup_pos is None or self._backup_pos.shape != self.pos.shape:
            self._backup_pos = self.pos.copy()
            self._backup_vel = self.vel.copy()
        else:
            np.copyto(self._backup_pos, self.pos)
            np.copyto(self._backup_vel, self.vel)

    def restore_backup(self) -> None:
        if self._backup_pos is None:
            raise RuntimeError("no backup saved")
        np.copyto(self.pos, self._backup_pos)
        np.copyto(self.vel, self._backup_vel)

    def collision_bounds(self) -> Tuple[float, float, float, float]:
        """Bounding sphere (cx, cy, cz, r_squared) enclosing all proxies."""
        return (*self._bound_center, self._bound_r2)

    def refresh_collision_bounds(self) -> None:
        if self.proxies_world.shape[0] == 0:
            self._bound_center = (0.0, 0.0, 0.0)
            self._bound_r2 = -1.0
            return
        centers = self.proxies_world[:, :3]
        radii = self.proxies_world[:, 3]
        c = centers.mean(axis=0)
        r = float(np.max(np.linalg.norm(centers - c, axis=1) + radii))
        self._bound_center = (float(c[0]), float(c[1]), float(c[2]))
        self._bound_r2 = r * r

    def remove_particles(self, dead: np.ndarray) -> int:
        """Compact away particles flagged in the boolean mask `dead`.

        Surviving particles keep their relative order, so strand runs
        stay contiguous. Springs survive only when both endpoints do.
        Grab records are pruned to surviving particles. Returns the
        number of particles removed.
        """
        dead = np.asarray(dead, dtype=bool)
        if dead.shape != (self.particle_count,):
            raise ValueError("mask shape mismatch")
        removed = int(dead.sum())
        if removed == 0:
            return 0
        keep = ~dead
        remap = np.full(self.particle_count, -1, dtype=np.int64)
        remap[keep] = np.arange(int(keep.sum()), dtype=np.int64)

        if np.any(dead[self.root_of[keep]]):
            raise RuntimeError("cannot remove a strand root while its strand survives")

        self.pos = np.ascontiguousarray(self.pos[keep])
        self.vel = np.ascontiguousarray(self.vel[keep])
        self.inv_mass = np.ascontiguousarray(self.inv_mass[keep])
        self.rest_pos = np.ascontiguousarray(self.rest_pos[keep])
        self.strand_ids = np.ascontiguousarray(self.strand_ids[keep])
        self.index_in_strand = np.ascontiguousarray(self.index_in_strand[keep])
        self.root_of = remap[self.root_of[keep]].astype(np.int32)

        s_keep = keep[self.sp_a] & keep[self.sp_b]
        self.sp_kind = np.ascontiguousarray(self.sp_kind[s_keep])
        self.sp_a = remap[self.sp_a[s_keep]].astype(np.int32)
        self.sp_b = remap[self.sp_b[s_keep]].astype(np.int32)
        self.sp_rest = np.ascontiguousarray(self.sp_rest[s_keep])
        self.sp_k = np.ascontiguousarray(self.sp_k[s_keep])
        self.sp_c = np.ascontiguousarray(self.sp_c[s_keep])
        self.sp_off = np.ascontiguousarray(self.sp_off[s_keep])

        stale: List[int] = []
        for hid, rec in self.grabs.items():
            kept = rec.ids[keep[rec.ids]]
            rec.ids = remap[kept].astype(np.int32)
            if rec.ids.size == 0:
                stale.append(hid)
        for hid in stale:
            del self.grabs[hid]

        self._backup_pos = None
        self._backup_vel = None
        self._runs = None
        self._force = None
        return removed
