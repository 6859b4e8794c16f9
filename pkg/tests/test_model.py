import numpy as np
import pytest

from hairforge.model import (HeadMesh, Hairstyle, PaintSelection,
                             RenderAttributes, Strand, validate_hairstyle)


def _style(strands, **kw):
    return Hairstyle(id="s", strands=strands, **kw)


def test_wellformed_style_has_no_violations():
    s1 = Strand([[0, 9, 0], [0, 8, 0], [0, 7, 0]])
    s2 = Strand([[1, 9, 0], [1, 8, 0]])
    assert validate_hairstyle(_style([s1, s2])) == []


def test_nan_coordinate_named_by_strand_index():
    good = Strand([[0, 9, 0], [0, 8, 0]])
    bad = Strand([[0, 9, 0], [np.nan, 8, 0]])
    violations = validate_hairstyle(_style([good, bad]))
    assert len(violations) == 1
    assert violations[0].rule == "finite"
    assert violations[0].strand == 1


def test_zero_strands_is_nonempty_violation():
    violations = validate_hairstyle(_style([]))
    assert [v.rule for v in violations] == ["nonempty"]


def test_single_vertex_strand_is_legal_degenerate():
    assert validate_hairstyle(_style([Strand([[0, 9, 0]])])) == []


def test_zero_vertex_strand_flagged():
    violations = validate_hairstyle(_style([Strand(np.empty((0, 3)))]))
    assert violations[0].rule == "min_vertices"


def test_validation_is_pure():
    style = _style([Strand([[0, 9, 0], [np.inf, 8, 0]])])
    assert validate_hairstyle(style) == validate_hairstyle(style)


def test_strand_vertices_read_only():
    s = Strand([[0, 0, 0], [1, 0, 0]])
    with pytest.raises(ValueError):
        s.vertices[0, 0] = 5.0


def test_strand_count_and_len():
    s = Strand([[0, 0, 0], [1, 0, 0], [2, 0, 0]])
    assert len(s) == 3
    assert s.root_index == 0
    assert _style([s]).strand_count == 1


def test_source_enum_enforced():
    with pytest.raises(ValueError):
        _style([Strand([[0, 0, 0], [1, 0, 0]])], source="imagined")


def _flat_mesh(proxies=np.empty((0, 4))):
    verts = [[0, 0, 0], [2, 0, 0], [0, 2, 0], [2, 2, 0]]
    tris = [[0, 1, 2], [1, 3, 2]]
    normals = [[0, 0, 1]] * 4
    return HeadMesh(vertices=verts, triangles=tris, vertex_normals=normals,
                    collision_proxies=proxies)


def test_headmesh_accepts_valid():
    m = _flat_mesh()
    assert m.triangles.shape == (2, 3)
    assert np.allclose(m.triangle_areas(), [2.0, 2.0])


def test_headmesh_rejects_bad_triangle_index():
    with pytest.raises(ValueError):
        HeadMesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0]], triangles=[[0, 1, 9]],
                 vertex_normals=[[0, 0, 1]] * 3, collision_proxies=np.empty((0, 4)))


def test_headmesh_rejects_non_unit_normal():
    with pytest.raises(ValueError):
        HeadMesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0]], triangles=[[0, 1, 2]],
                 vertex_normals=[[0, 0, 1], [0, 0, 1], [0, 0, 2]],
                 collision_proxies=np.empty((0, 4)))


def test_headmesh_rejects_escaping_proxy():
    with pytest.raises(ValueError):
        _flat_mesh(proxies=[[50.0, 0.0, 0.0, 1.0]])


def test_paint_selection_requires_positive_density():
    with pytest.raises(ValueError):
        PaintSelection(triangle_ids=frozenset({0}), density=0.0)


def test_render_attributes_field_order():
    attrs = RenderAttributes(gender="a", hair_color="b", head_pose="c", misc="d")
    assert attrs.fields_in_order() == ("a", "b", "c", "d")
