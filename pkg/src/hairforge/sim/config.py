"""Simulation configuration and wind field types."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonUnitDirection


@dataclass(frozen=True, slots=True)
class SimConfig:
    """Integrator, spring, coupling, and collision parameters.

    dt is the substep; the display loop runs `substeps` of them per
    60 Hz frame. Stiffness units are g/s^2 (force per cm of extension
    on a 1 g particle); biphasic_ratio multiplies aug-spring stiffness
    under stretch only. repulsion_gain defaults to zero because any
    nonzero gain pushes a resting style off its fixed point.

    The one-way aug springs do net work around cycles that cross the
    stretch/compress boundary, so they inject energy; c_aug_local must
    stay large enough for dissipation to win or dense styles never
    settle. c_aug_global doubles as head-frame drag and is kept small
    to preserve swing.
    """

    dt: float = 1.0 / 600.0
    substeps: int = 10
    gravity: tuple = (0.0, -981.0, 0.0)
    global_damping: float = 0.8
    particle_mass: float = 1.0
    k_edge: float = 50_000.0
    k_bend: float = 2_000.0
    k_torsion: float = 1_000.0
    k_aug_local: float = 1_500.0
    k_aug_global: float = 1_500.0
    c_edge: float = 15.0
    c_bend: float = 5.0
    c_torsion: float = 3.0
    c_aug_local: float = 40.0
    c_aug_global: float = 4.0
    biphasic_ratio: float = 4.0
    grid_cell: float = 2.0
    grid_blend: float = 0.1
    repulsion_gain: float = 0.0
    collision_friction: float = 0.3
    wind_drag: float = 0.02
    grab_stiffness: float = 200_000.0
    grab_max_force: float = 1e6

    def __post_init__(self):
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.biphasic_ratio < 1.0:
            raise ValueError("biphasic_ratio must be >= 1")
        if not 0.0 <= self.grid_blend <= 1.0:
            raise ValueError("grid_blend must lie in [0, 1]")
        if not 0.0 <= self.collision_friction <= 1.0:
            raise ValueError("collision_friction must lie in [0, 1]")
        if self.particle_mass <= 0 or self.grid_cell <= 0:
            raise ValueError("particle_mass and grid_cell must be positive")
        for name in ("global_damping", "k_edge", "k_bend", "k_torsion",
                     "k_aug_local", "k_aug_global", "c_edge", "c_bend",
                     "c_torsion", "c_aug_local", "c_aug_global",
                     "repulsion_gain", "wind_drag",
                     "grab_stiffness", "grab_max_force"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative")
        if any(not math.isfinite(g) for g in self.gravity):
            raise ValueError("gravity must be finite")


@dataclass(frozen=True, slots=True)
class WindField:
    """Gusty directional wind; disabled fields contribute nothing."""

    direction: tuple = (1.0, 0.0, 0.0)
    strength: float = 0.0
    gust_amplitude: float = 0.0
    gust_frequency: float = 0.5
    turbulence_seed: int = 0
    enabled: bool = False

    def __post_init__(self):
        d = np.asarray(self.direction, np.float64).reshape(3)
        object.__setattr__(self, "direction", (float(d[0]), float(d[1]), float(d[2])))
        if self.enabled and abs(np.linalg.norm(d) - 1.0) > 1e-5:
            raise NonUnitDirection(f"wind direction norm {np.linalg.norm(d)}")
        if not 0.0 <= self.gust_amplitude <= 1.0:
            raise ValueError("gust_amplitude must lie in [0, 1]")

    def phase(self) -> float:
        """Deterministic gust phase derived from the turbulence seed."""
        return float(np.random.default_rng(self.turbulence_seed).uniform(0.0, 2.0 * math.pi))

    def velocity_at(self, t: float) -> np.ndarray:
        """Wind velocity vector at simulation time t, cm/s."""
        if not self.enabled:
            return np.zeros(3)
        gust = 1.0 + self.gust_amplitude * math.sin(
            2.0 * math.pi * self.gust_frequency * t + self.phase())
        return np.asarray(self.direction) * self.strength * gust
