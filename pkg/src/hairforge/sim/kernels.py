"""Serial numba kernels for the substep pipeline.

Everything is single-threaded on purpose: force accumulation order is
part of the behavioral contract (ascending spring index), which makes
trajectories bit-identical regardless of thread count. Particle state
is float32; grid accumulators are float64 so the scatter conserves
momentum to well under 1e-6 relative.

Rest lengths MUST be produced by rest_lengths() so the float32 length
expression matches the step kernel bit for bit; that is what makes a
resting style an exact fixed point. No fastmath anywhere for the same
reason.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_EDGE = 0
KIND_BEND = 1
KIND_TORSION = 2
KIND_AUG_LOCAL = 3
KIND_AUG_GLOBAL = 4

_F32_ONE = np.float32(1.0)


@njit(cache=True)
def rest_lengths(rest_pos, sp_a, sp_b, out):
    """Spring rest lengths via the same float32 expression step uses."""
    for s in range(sp_a.shape[0]):
        ia = sp_a[s]
        ib = sp_b[s]
        dx = rest_pos[ib, 0] - rest_pos[ia, 0]
        dy = rest_pos[ib, 1] - rest_pos[ia, 1]
        dz = rest_pos[ib, 2] - rest_pos[ia, 2]
        out[s] = np.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True)
def spring_forces(pos, vel, force, sp_a, sp_b, sp_kind, sp_rest, sp_k, sp_c,
                  sp_off, rot, biphasic_ratio):
    """Accumulate all spring forces in ascending spring index order.

    Two-way kinds apply equal and opposite axial forces; aug kinds pull
    endpoint a toward the head-frame target pos_b + rot@offset and touch
    b not at all. Aug stiffness is multiplied by biphasic_ratio after
    the base product when stretched, so the stretch/compress force
    ratio is exactly biphasic_ratio.
    """
    ratio = np.float32(biphasic_ratio)
    r00 = rot[0, 0]; r01 = rot[0, 1]; r02 = rot[0, 2]
    r10 = rot[1, 0]; r11 = rot[1, 1]; r12 = rot[1, 2]
    r20 = rot[2, 0]; r21 = rot[2, 1]; r22 = rot[2, 2]
    for s in range(sp_a.shape[0]):
        ia = sp_a[s]
        ib = sp_b[s]
        if sp_kind[s] < KIND_AUG_LOCAL:
            dx = pos[ib, 0] - pos[ia, 0]
            dy = pos[ib, 1] - pos[ia, 1]
            dz = pos[ib, 2] - pos[ia, 2]
            length = np.sqrt(dx * dx + dy * dy + dz * dz)
            if length < np.float32(1e-12):
                continue
            ux = dx / length
            uy = dy / length
            uz = dz / length
            ext = length - sp_rest[s]
            rvx = vel[ib, 0] - vel[ia, 0]
            rvy = vel[ib, 1] - vel[ia, 1]
            rvz = vel[ib, 2] - vel[ia, 2]
            along = rvx * ux + rvy * uy + rvz * uz
            f = sp_k[s] * ext + sp_c[s] * along
            fx = f * ux
            fy = f * uy
            fz = f * uz
            force[ia, 0] += fx
            force[ia, 1] += fy
            force[ia, 2] += fz
            force[ib, 0] -= fx
            force[ib, 1] -= fy
            force[ib, 2] -= fz
        else:
            sx = pos[ib, 0] - pos[ia, 0]
            sy = pos[ib, 1] - pos[ia, 1]
            sz = pos[ib, 2] - pos[ia, 2]
            length = np.sqrt(sx * sx + sy * sy + sz * sz)
            ext = length - sp_rest[s]
            ox = sp_off[s, 0]
            oy = sp_off[s, 1]
            oz = sp_off[s, 2]
            tx = r00 * ox + r01 * oy + r02 * oz
            ty = r10 * ox + r11 * oy + r12 * oz
            tz = r20 * ox + r21 * oy + r22 * oz
            dx = tx + sx
            dy = ty + sy
            dz = tz + sz
            fx = sp_k[s] * dx
            fy = sp_k[s] * dy
            fz = sp_k[s] * dz
            if ext > np.float32(0.0):
                fx *= ratio
                fy *= ratio
                fz *= ratio
            fx += sp_c[s] * (vel[ib, 0] - vel[ia, 0])
            fy += sp_c[s] * (vel[ib, 1] - vel[ia, 1])
            fz += sp_c[s] * (vel[ib, 2] - vel[ia, 2])
            force[ia, 0] += fx
            force[ia, 1] += fy
            force[ia, 2] += fz


@njit(cache=True)
def grab_forces(pos, force, ids, tx, ty, tz, stiffness, max_force):
    """One-way clamped spring toward the grab target."""
    for n in range(ids.shape[0]):
        p = ids[n]
        fx = stiffness * (tx - pos[p, 0])
        fy = stiffness * (ty - pos[p, 1])
        fz = stiffness * (tz - pos[p, 2])
        mag = np.sqrt(fx * fx + fy * fy + fz * fz)
        if mag > max_force:
            scale = max_force / mag
            fx *= scale
            fy *= scale
            fz *= scale
        force[p, 0] += fx
        force[p, 1] += fy
        force[p, 2] += fz


@njit(cache=True)
def integrate(pos, vel, force, inv_mass, dt, gx, gy, gz, damp_factor,
              apply_wind, wvx, wvy, wvz, drag):
    """Semi-implicit update; returns particle AABB and a health flag.

    Wind force is drag * (wind_velocity - v) per free particle, with
    drag = wind_drag * strength baked in by the caller. Health flag is
    1 when any coordinate is non-finite or beyond 1e6.
    """
    n = pos.shape[0]
    dt32 = np.float32(dt)
    gx32 = np.float32(gx)
    gy32 = np.float32(gy)
    gz32 = np.float32(gz)
    damp32 = np.float32(damp_factor)
    wvx32 = np.float32(wvx)
    wvy32 = np.float32(wvy)
    wvz32 = np.float32(wvz)
    drag32 = np.float32(drag)
    minx = np.float64(np.inf)
    miny = np.float64(np.inf)
    minz = np.float64(np.inf)
    maxx = -np.float64(np.inf)
    maxy = -np.float64(np.inf)
    maxz = -np.float64(np.inf)
    bad = 0
    for p in range(n):
        im = inv_mass[p]
        if im > np.float32(0.0):
            fx = force[p, 0]
            fy = force[p, 1]
            fz = force[p, 2]
            if apply_wind:
                fx += drag32 * (wvx32 - vel[p, 0])
                fy += drag32 * (wvy32 - vel[p, 1])
                fz += drag32 * (wvz32 - vel[p, 2])
            vx = (vel[p, 0] + dt32 * (fx * im + gx32)) * damp32
            vy = (vel[p, 1] + dt32 * (fy * im + gy32)) * damp32
            vz = (vel[p, 2] + dt32 * (fz * im + gz32)) * damp32
            vel[p, 0] = vx
            vel[p, 1] = vy
            vel[p, 2] = vz
            pos[p, 0] += dt32 * vx
            pos[p, 1] += dt32 * vy
            pos[p, 2] += dt32 * vz
        x = pos[p, 0]
        y = pos[p, 1]
        z = pos[p, 2]
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            bad = 1
        elif abs(x) > 1e6 or abs(y) > 1e6 or abs(z) > 1e6:
            bad = 1
        if x < minx:
            minx = x
        if y < miny:
            miny = y
        if z < minz:
            minz = z
        if x > maxx:
            maxx = x
        if y > maxy:
            maxy = y
        if z > maxz:
            maxz = z
    return minx, miny, minz, maxx, maxy, maxz, bad


@njit(cache=True)
def grid_scatter(pos, vel, mass_each, ox, oy, oz, inv_cell, dx_, dy_, dz_,
                 mom, mass):
    """Trilinear momentum/mass scatter, serial ascending particle order.

    Weights are computed in float64 so the cell sums conserve the exact
    particle totals to machine precision.
    """
    sy = dz_
    sx = dy_ * dz_
    for p in range(pos.shape[0]):
        fx = (np.float64(pos[p, 0]) - ox) * inv_cell
        fy = (np.float64(pos[p, 1]) - oy) * inv_cell
        fz = (np.float64(pos[p, 2]) - oz) * inv_cell
        ix = int(fx)
        iy = int(fy)
        iz = int(fz)
        tx = fx - ix
        ty = fy - iy
        tz = fz - iz
        vx = np.float64(vel[p, 0]) * mass_each
        vy = np.float64(vel[p, 1]) * mass_each
        vz = np.float64(vel[p, 2]) * mass_each
        base = ix * sx + iy * sy + iz
        wx0 = 1.0 - tx
        wy0 = 1.0 - ty
        wz0 = 1.0 - tz
        c = base
        w = wx0 * wy0 * wz0
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + 1
        w = wx0 * wy0 * tz
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sy
        w = wx0 * ty * wz0
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sy + 1
        w = wx0 * ty * tz
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sx
        w = tx * wy0 * wz0
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sx + 1
        w = tx * wy0 * tz
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sx + sy
        w = tx * ty * wz0
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each
        c = base + sx + sy + 1
        w = tx * ty * tz
        mom[c, 0] += w * vx; mom[c, 1] += w * vy; mom[c, 2] += w * vz; mass[c] += w * mass_each


@njit(cache=True)
def grid_normalize(mom, mass, vel_grid):
    for c in range(mass.shape[0]):
        m = mass[c]
        if m > 1e-12:
            vel_grid[c, 0] = mom[c, 0] / m
            vel_grid[c, 1] = mom[c, 1] / m
            vel_grid[c, 2] = mom[c, 2] / m
        else:
            vel_grid[c, 0] = 0.0
            vel_grid[c, 1] = 0.0
            vel_grid[c, 2] = 0.0


@njit(cache=True)
def _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx, fy, fz):
    ix = int(fx)
    iy = int(fy)
    iz = int(fz)
    if ix < 0:
        ix = 0
    if iy < 0:
        iy = 0
    if iz < 0:
        iz = 0
    if ix > dx_ - 2:
        ix = dx_ - 2
    if iy > dy_ - 2:
        iy = dy_ - 2
    if iz > dz_ - 2:
        iz = dz_ - 2
    tx = fx - ix
    ty = fy - iy
    tz = fz - iz
    base = ix * sx + iy * sy + iz
    m = 0.0
    m += mass[base] * (1.0 - tx) * (1.0 - ty) * (1.0 - tz)
    m += mass[base + 1] * (1.0 - tx) * (1.0 - ty) * tz
    m += mass[base + sy] * (1.0 - tx) * ty * (1.0 - tz)
    m += mass[base + sy + 1] * (1.0 - tx) * ty * tz
    m += mass[base + sx] * tx * (1.0 - ty) * (1.0 - tz)
    m += mass[base + sx + 1] * tx * (1.0 - ty) * tz
    m += mass[base + sx + sy] * tx * ty * (1.0 - tz)
    m += mass[base + sx + sy + 1] * tx * ty * tz
    return m


@njit(cache=True)
def blend_and_collide(pos, vel, inv_mass, ox, oy, oz, inv_cell,
                      dx_, dy_, dz_, vel_grid, mass, grid_blend,
                      repulsion_gain, proxies, n_proxies,
                      bcx, bcy, bcz, br2, friction):
    """Velocity blend toward the grid, optional density repulsion, then
    sphere-proxy collision with tangential friction. Free particles only."""
    sy = dz_
    sx = dy_ * dz_
    keep = 1.0 - friction
    for p in range(pos.shape[0]):
        if inv_mass[p] <= np.float32(0.0):
            continue
        fx = (np.float64(pos[p, 0]) - ox) * inv_cell
        fy = (np.float64(pos[p, 1]) - oy) * inv_cell
        fz = (np.float64(pos[p, 2]) - oz) * inv_cell
        ix = int(fx)
        iy = int(fy)
        iz = int(fz)
        tx = fx - ix
        ty = fy - iy
        tz = fz - iz
        base = ix * sx + iy * sy + iz
        gvx = 0.0
        gvy = 0.0
        gvz = 0.0
        w = (1.0 - tx) * (1.0 - ty) * (1.0 - tz)
        gvx += vel_grid[base, 0] * w; gvy += vel_grid[base, 1] * w; gvz += vel_grid[base, 2] * w
        w = (1.0 - tx) * (1.0 - ty) * tz
        c = base + 1
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = (1.0 - tx) * ty * (1.0 - tz)
        c = base + sy
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = (1.0 - tx) * ty * tz
        c = base + sy + 1
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = tx * (1.0 - ty) * (1.0 - tz)
        c = base + sx
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = tx * (1.0 - ty) * tz
        c = base + sx + 1
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = tx * ty * (1.0 - tz)
        c = base + sx + sy
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w
        w = tx * ty * tz
        c = base + sx + sy + 1
        gvx += vel_grid[c, 0] * w; gvy += vel_grid[c, 1] * w; gvz += vel_grid[c, 2] * w

        vx = np.float64(vel[p, 0])
        vy = np.float64(vel[p, 1])
        vz = np.float64(vel[p, 2])
        vx += grid_blend * (gvx - vx)
        vy += grid_blend * (gvy - vy)
        vz += grid_blend * (gvz - vz)

        if repulsion_gain != 0.0:
            h = 0.5
            gx = _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx + h, fy, fz) \
                - _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx - h, fy, fz)
            gy = _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx, fy + h, fz) \
                - _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx, fy - h, fz)
            gz = _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx, fy, fz + h) \
                - _sample_mass(mass, sx, sy, dx_, dy_, dz_, fx, fy, fz - h)
            vx -= repulsion_gain * gx
            vy -= repulsion_gain * gy
            vz -= repulsion_gain * gz

        px = np.float64(pos[p, 0])
        py = np.float64(pos[p, 1])
        pz = np.float64(pos[p, 2])
        ddx = px - bcx
        ddy = py - bcy
        ddz = pz - bcz
        if ddx * ddx + ddy * ddy + ddz * ddz < br2:
            for q in range(n_proxies):
                cx = proxies[q, 0]
                cy = proxies[q, 1]
                cz = proxies[q, 2]
                r = proxies[q, 3]
                ex = px - cx
                ey = py - cy
                ez = pz - cz
                d2 = ex * ex + ey * ey + ez * ez
                if d2 < r * r:
                    d = np.sqrt(d2)
                    if d < 1e-9:
                        ex = 0.0
                        ey = 1.0
                        ez = 0.0
                        d = 1.0
                    nx = ex / d
                    ny = ey / d
                    nz = ez / d
                    px = cx + nx * r
                    py = cy + ny * r
                    pz = cz + nz * r
                    vn = vx * nx + vy * ny + vz * nz
                    if vn < 0.0:
                        vx -= vn * nx
                        vy -= vn * ny
                        vz -= vn * nz
                        vx *= keep
                        vy *= keep
                        vz *= keep

        pos[p, 0] = np.float32(px)
        pos[p, 1] = np.float32(py)
        pos[p, 2] = np.float32(pz)
        vel[p, 0] = np.float32(vx)
        vel[p, 1] = np.float32(vy)
        vel[p, 2] = np.float32(vz)
