"""Real-time strand dynamics: springs, grid coupling, wind, collision."""

from .config import SimConfig, WindField
from .engine import (
    build_sim,
    retune,
    kinetic_energy,
    scatter_totals,
    set_head_transform,
    set_wind,
    snapshot_style,
    step,
    step_frame,
)
from .state import GrabRecord, ParticleView, SimState, SpringView

__all__ = [
    "SimConfig",
    "WindField",
    "SimState",
    "GrabRecord",
    "ParticleView",
    "SpringView",
    "build_sim",
    "retune",
    "step",
    "step_frame",
    "set_wind",
    "set_head_transform",
    "kinetic_energy",
    "scatter_totals",
    "snapshot_style",
]
