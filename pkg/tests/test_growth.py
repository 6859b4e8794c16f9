import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hairforge.errors import EmptySelection, NonFiniteInput
from hairforge.growth import (GrowthParams, grow_region, grow_strand,
                              gravity_at, helix_at, sample_root, sweep_grid)
from hairforge.model import HeadMesh, PaintSelection

from oracles.growth_oracle import grow_oracle

# Frozen output of the independent oracle for the pinned parameter set
# root=(0,0,0) dir0=(0,0,1) cap=0.2 gravity=0.05 spiral=0.3 helix=1 freq=1 T=16.
PINNED_EXPECTED = [
    (0.0, 0.0, 0.0),
    (-0.1620906917604419, -0.3, 1.0475587045576311),
    (-0.24796454008487367, -1.0354999999999999, 2.1365957924348473),
    (-0.06260279392650137, -2.3260349999999996, 3.510008004257268),
    (0.3744605623384662, -4.342730499999999, 5.522484628218793),
    (0.8575442698439562, -7.316434649999999, 8.426381521767716),
    (1.1975020036059834, -11.547250044999998, 12.285272132840996),
    (1.4132763811936273, -17.425310058499996, 17.104733947620623),
    (1.7374330822001485, -25.457788076049994, 23.073226832847123),
    (2.432175872074029, -36.30400949886499, 30.708632038069045),
    (3.5870629576330098, -50.82109734852449, 40.79786513812435),
    (5.087088459463269, -70.12331155308183, 54.21386523016147),
    (6.783965424222858, -95.65919001900639, 71.81563722520985),
    (8.717671443975266, -129.3118320247083, 94.57189070772476),
    (11.190468104191046, -173.5292666321208, 123.85783802828567),
    (14.633010136329206, -231.49393162175704, 161.73448319296773),
    (19.39561262220583, -307.3429961082842, 211.0604929020539),
]


def test_straight_strand_with_gravity_and_spiral_off():
    p = GrowthParams(p_gravity=0.0, p_spiral=0.0, steps=3, segment_scale=1.0)
    s = grow_strand((0, 0, 0), (0, 1, 0), p)
    assert np.array_equal(s.vertices,
                          [[0, 0, 0], [0, 1, 0], [0, 2, 0], [0, 3, 0]])


def test_zero_steps_gives_single_vertex():
    s = grow_strand((1, 2, 3), (0, 1, 0), GrowthParams(steps=0))
    assert s.vertices.shape == (1, 3)
    assert np.array_equal(s.vertices[0], [1, 2, 3])


def test_pinned_case_matches_frozen_oracle_values():
    p = GrowthParams(p_gamma_cap=0.2, p_gravity=0.05, p_spiral=0.3,
                     p_helix_radius=1.0, p_freq=1.0, steps=16, segment_scale=1.0)
    s = grow_strand((0, 0, 0), (0, 0, 1), p)
    assert np.abs(s.vertices - np.array(PINNED_EXPECTED)).max() < 1e-6


def test_cursor_recomputation_bit_exact():
    p = GrowthParams(p_gravity=0.07, p_helix_radius=0.8, p_freq=1.3, steps=12)
    cursors = []
    grow_strand((0, 9, 0), (0.1, 1.0, 0.2), p, cursors=cursors)
    assert len(cursors) == 12
    for cur in cursors:
        assert cur.grav == gravity_at(cur.step, p)
        assert cur.helix == helix_at(cur.step, p)


def test_non_finite_inputs_rejected():
    with pytest.raises(NonFiniteInput):
        grow_strand((0, np.nan, 0), (0, 1, 0), GrowthParams())
    with pytest.raises(NonFiniteInput):
        grow_strand((0, 0, 0), (np.inf, 1, 0), GrowthParams())


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        grow_strand((0, 0, 0), (0, 0, 0), GrowthParams())


def test_param_invariants_enforced():
    with pytest.raises(ValueError):
        GrowthParams(p_gamma_cap=1.5)
    with pytest.raises(ValueError):
        GrowthParams(steps=-1)
    with pytest.raises(ValueError):
        GrowthParams(segment_scale=0.0)


@settings(max_examples=40, deadline=None)
@given(dx=st.floats(-2, 2), dy=st.floats(-2, 2), dz=st.floats(-2, 2),
       scale=st.floats(0.05, 3.0), steps=st.integers(1, 24))
def test_segments_constant_when_gravity_and_spiral_off(dx, dy, dz, scale, steps):
    if dx == 0 and dy == 0 and dz == 0:
        dy = 1.0
    p = GrowthParams(p_gravity=0.0, p_spiral=0.0, steps=steps, segment_scale=scale)
    s = grow_strand((0, 0, 0), (dx, dy, dz), p)
    segs = np.diff(s.vertices, axis=0)
    expected = scale * np.array([dx, dy, dz])
    assert np.allclose(segs, expected[None, :], rtol=0, atol=1e-9)


def test_dir_y_non_increasing_under_gravity_without_spiral():
    p = GrowthParams(p_gravity=0.05, p_spiral=0.0, steps=30)
    cursors = []
    grow_strand((0, 9, 0), (0.3, 0.9, 0.1), p, cursors=cursors)
    dys = [c.dir[1] for c in cursors]
    assert all(b <= a for a, b in zip(dys, dys[1:]))


def test_vertex_count_always_steps_plus_one():
    for t in (0, 1, 5, 33):
        s = grow_strand((0, 0, 0), (0, 1, 0), GrowthParams(steps=t))
        assert len(s) == t + 1


# --- root sampling -----------------------------------------------------------

def _two_triangle_mesh():
    # areas 1 and 3
    verts = [[0, 0, 0], [2, 0, 0], [0, 1, 0], [0, 0, 3]]
    tris = [[0, 1, 2], [0, 1, 3]]
    normals = [[0, 1, 0]] * 4
    return HeadMesh(vertices=verts, triangles=tris, vertex_normals=normals,
                    collision_proxies=np.empty((0, 4)))


class _ForcedRng:
    """Generator stub: every uniform draw returns 0."""

    def random(self, *a):
        return 0.0

    def uniform(self, lo, hi, size=None):
        return np.zeros(size) if size else 0.0


def test_forced_barycentric_corner_returns_vertex_zero():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0}))
    root, dir0, tri = sample_root(mesh, sel, _ForcedRng())
    assert tri == 0
    assert np.array_equal(root, mesh.vertices[0])
    assert np.array_equal(dir0, mesh.vertex_normals[0])


def test_empty_selection_raises():
    sel = PaintSelection(triangle_ids=frozenset())
    with pytest.raises(EmptySelection):
        sample_root(_two_triangle_mesh(), sel, 0)


def test_area_weighted_choice_monte_carlo():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0, 1}))
    rng = np.random.default_rng(1234)
    hits = sum(sample_root(mesh, sel, rng)[2] == 1 for _ in range(10_000))
    assert abs(hits / 10_000 - 0.75) < 0.02


def test_sample_root_deterministic_for_seed():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0, 1}))
    a = sample_root(mesh, sel, 77)
    b = sample_root(mesh, sel, 77)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    assert a[2] == b[2]


# --- region growth -----------------------------------------------------------

def test_grow_region_zero_count():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0}))
    assert grow_region(mesh, sel, GrowthParams(), 0, 9) == []


@pytest.mark.parametrize("bad_id", [-1, 2, 10 ** 9])
def test_grow_region_rejects_out_of_range_triangle(bad_id):
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0, bad_id}))
    with pytest.raises(ValueError, match="triangle ids"):
        grow_region(mesh, sel, GrowthParams(), 1, 9)


def _barycentric_inside(mesh, tri, point, tol=1e-9):
    a, b, c = (mesh.vertices[i] for i in mesh.triangles[tri])
    m = np.column_stack([b - a, c - a])
    sol, _, _, _ = np.linalg.lstsq(m, point - a, rcond=None)
    u, v = sol
    return u >= -tol and v >= -tol and u + v <= 1 + tol


def test_grow_region_roots_inside_selected_triangles():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0, 1}))
    params = GrowthParams(steps=4)
    strands = grow_region(mesh, sel, params, 100, rng_seed=5)
    assert len(strands) == 100
    for k in range(100):
        rng = np.random.default_rng(np.random.SeedSequence((5, k)))
        _, _, tri = sample_root(mesh, sel, rng, params.perturbation_scale)
        assert _barycentric_inside(mesh, tri, strands[k].vertices[0])


def test_grow_region_bit_identical_for_seed():
    mesh = _two_triangle_mesh()
    sel = PaintSelection(triangle_ids=frozenset({0, 1}))
    a = grow_region(mesh, sel, GrowthParams(steps=6), 20, 42)
    b = grow_region(mesh, sel, GrowthParams(steps=6), 20, 42)
    for s, t in zip(a, b):
        assert np.array_equal(s.vertices, t.vertices)


# --- sweep -------------------------------------------------------------------

def test_sweep_single_cell_equals_grow_strand():
    base = GrowthParams(steps=10)
    grid = sweep_grid((0, 0, 0), (0, 0, 1), base, [0.7], [0.03])
    from dataclasses import replace
    merged = replace(base, p_helix_radius=0.7, p_gravity=0.03)
    direct = grow_strand((0, 0, 0), (0, 0, 1), merged)
    assert np.array_equal(grid[0][0].vertices, direct.vertices)


def test_sweep_grid_shape_and_xz_extent_monotone_in_helix_radius():
    # vertical dir0: x-z motion comes only from the helix term, so the
    # extent scales with its radius; lateral dir0 breaks this
    base = GrowthParams(steps=14)
    grid = sweep_grid((0, 0, 0), (0, 1, 0), base, [0.2, 0.5, 1.0], [0.0, 0.05, 0.1])
    assert len(grid) == 3 and all(len(row) == 3 for row in grid)
    for col in range(3):
        extents = []
        for row in range(3):
            v = grid[row][col].vertices
            span = (v[:, 0].max() - v[:, 0].min()) + (v[:, 2].max() - v[:, 2].min())
            extents.append(span)
        assert extents[0] < extents[1] < extents[2]


def test_sweep_requires_non_empty_axes():
    with pytest.raises(ValueError):
        sweep_grid((0, 0, 0), (0, 1, 0), GrowthParams(), [], [0.1])


# --- acceptance-grade random equivalence lives in test_acceptance -------------

def test_random_draw_agrees_with_oracle_spot_check():
    rng = np.random.default_rng(99)
    for _ in range(10):
        params = GrowthParams(
            p_gamma_cap=float(rng.uniform(0, 1)),
            p_gravity=float(rng.uniform(0, 0.2)),
            p_spiral=float(rng.uniform(0, 0.6)),
            p_helix_radius=float(rng.uniform(0, 1.5)),
            p_freq=float(rng.uniform(0.2, 3.0)),
            steps=int(rng.integers(0, 40)),
            segment_scale=float(rng.uniform(0.1, 2.0)),
        )
        root = rng.uniform(-5, 5, 3)
        dir0 = rng.uniform(-1, 1, 3)
        if not dir0.any():
            dir0 = np.array([0.0, 1.0, 0.0])
        got = grow_strand(root, dir0, params).vertices
        want = np.array(grow_oracle(root, dir0, params.p_gamma_cap,
                                    params.p_gravity, params.p_spiral,
                                    params.p_helix_radius, params.p_freq,
                                    params.steps, params.segment_scale))
        assert np.abs(got - want).max() < 1e-6
