"""Independent reference for procedural strand growth.

Straight-line transcription of the growth recursion using plain Python
floats and the math module only. Written before the package module it
checks; deliberately imports nothing from hairforge.

Recursion, per step i = 1..T:
    grav(i-1) = (0, -(i-1)*p_gravity, 0)        zero vector at i=1
    cap       = max(p_gamma_cap, 1 - |dir_y|)   dir_y of step i-1
    dir'      = dir(i-1) + grav(i-1)*cap
    helix(i)  = (p_h*cos(i*p_freq), 1, p_h*sin(i*p_freq))
    dir(i)    = dir' + p_spiral*(dir' - helix(i))
    v(i)      = v(i-1) + segment_scale*dir(i)

Directions are never normalized.
"""

from __future__ import annotations

import math


def grow_oracle(root, dir0, p_gamma_cap, p_gravity, p_spiral, p_h, p_freq,
                steps, segment_scale):
    """Return the list of T+1 vertices as (x, y, z) float tuples."""
    vx, vy, vz = float(root[0]), float(root[1]), float(root[2])
    dx, dy, dz = float(dir0[0]), float(dir0[1]), float(dir0[2])
    verts = [(vx, vy, vz)]
    for i in range(1, int(steps) + 1):
        gy = -(i - 1) * p_gravity
        cap = max(p_gamma_cap, 1.0 - abs(dy))
        px = dx
        py = dy + gy * cap
        pz = dz
        hx = p_h * math.cos(i * p_freq)
        hy = 1.0
        hz = p_h * math.sin(i * p_freq)
        dx = px + p_spiral * (px - hx)
        dy = py + p_spiral * (py - hy)
        dz = pz + p_spiral * (pz - hz)
        vx = vx + segment_scale * dx
        vy = vy + segment_scale * dy
        vz = vz + segment_scale * dz
        verts.append((vx, vy, vz))
    return verts


def cursor_oracle(i, p_gravity, p_h, p_freq):
    """Expected (grav, helix) vectors at step i, recomputed from scratch."""
    grav = (0.0, -i * p_gravity, 0.0)
    helix = (p_h * math.cos(i * p_freq), 1.0, p_h * math.sin(i * p_freq))
    return grav, helix
