import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from chaincsg.errors import DegenerateFaceError, ValidationError
from chaincsg.geometry import (AffineMap, Box, IntervalTreeSet, interior_point,
                               kd_nearest_within, plane_frame, rotate, scale,
                               signed_area, translate, triangulate_face)


# --- interval trees ---------------------------------------------------------

box_st = st.tuples(st.floats(-10, 10), st.floats(0, 5), st.floats(-10, 10), st.floats(0, 5),
                   st.floats(-10, 10), st.floats(0, 5))


def _box(b):
    x, w, y, h, z, d = b
    return Box([x, y, z], [x + w, y + h, z + d])


@given(st.lists(box_st, min_size=1, max_size=40), box_st)
def test_index_matches_brute_force(boxes, q):
    boxes = [_box(b) for b in boxes]
    q = _box(q)
    idx = IntervalTreeSet(boxes)
    assert idx.query(q) == [i for i, b in enumerate(boxes) if b.overlaps(q)]


def test_index_touching_boxes_overlap():
    idx = IntervalTreeSet([Box([0, 0], [1, 1]), Box([2, 2], [3, 3])])
    assert idx.query(Box([1, 1], [2, 2])) == [0, 1]
    assert idx.query(Box([1.1, 1.1], [1.9, 1.9])) == []


def test_empty_index():
    assert IntervalTreeSet([]).query(Box([0, 0], [1, 1])) == []


def test_box_rejects_inverted():
    with pytest.raises(ValidationError):
        Box([1, 0], [0, 1])


# --- affine maps ------------------------------------------------------------

@pytest.mark.parametrize("angles, point, expected", [
    ((math.pi / 2, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((0, math.pi / 2, 0), (0, 0, 1), (1, 0, 0)),
    ((0, 0, math.pi / 2), (1, 0, 0), (0, 1, 0)),
])
def test_rotations_are_right_handed(angles, point, expected):
    assert np.allclose(rotate(*angles).apply([point])[0], expected)


def test_rotate_order_x_then_y_then_z():
    a, b, c = 0.3, -0.7, 1.1
    M = rotate(a, b, c)
    expected = rotate(0, 0, c) @ rotate(0, b, 0) @ rotate(a, 0, 0)
    assert np.allclose(M.matrix, expected.matrix)


def test_compose_and_inverse():
    M = translate(1, 2, 3) @ rotate(0.2, 0.4, 0.6) @ scale(2, 3, 4)
    p = np.random.default_rng(0).normal(size=(5, 3))
    assert np.allclose(M.inverse().apply(M.apply(p)), p)
    assert np.allclose(translate(1, 2).apply([[0, 0]]), [[1, 2]])


def test_singular_and_malformed():
    assert not scale(1, 0, 1).is_invertible()
    with pytest.raises(ValidationError):
        scale(1, 0, 1).inverse()
    with pytest.raises(ValidationError):
        AffineMap(np.ones((4, 4)))
    with pytest.raises(ValidationError):
        rotate(1, 2)


# --- plane frames -----------------------------------------------------------

def test_frame_follows_loop_orientation():
    sq = np.array([[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], dtype=float)
    fr = plane_frame(sq)
    assert np.allclose(fr.normal, [0, 0, 1])
    assert np.allclose(plane_frame(sq[::-1]).normal, [0, 0, -1])
    loc = fr.to_local(sq)
    assert np.allclose(loc[:, 2], 0)
    assert signed_area(loc[:, :2]) > 0
    assert np.allclose(fr.to_world(loc[:, :2]), sq)


@given(hnp.arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > .1))
def test_frame_is_orthonormal(n):
    n = n / np.linalg.norm(n)
    u = np.cross(n, [1, 0, 0] if abs(n[0]) < .9 else [0, 1, 0])
    v = np.cross(n, u)
    P = np.array([u, v, -u, -v]) + 3.0
    fr = plane_frame(P)
    R = fr.rotation
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-9)
    assert abs(abs(fr.normal @ n) - 1) < 1e-9


def test_degenerate_face():
    with pytest.raises(DegenerateFaceError):
        plane_frame(np.array([[0, 0, 0], [1, 1, 1], [2, 2, 2.0]]))
    with pytest.raises(DegenerateFaceError):
        plane_frame(np.zeros((3, 3)))


# --- triangulation ----------------------------------------------------------

def _tri_area(P, tris):
    return sum(0.5 * ((P[b][0] - P[a][0]) * (P[c][1] - P[a][1]) -
                      (P[b][1] - P[a][1]) * (P[c][0] - P[a][0])) for a, b, c in tris)


@given(st.integers(3, 24), st.integers(0, 10 ** 6), st.booleans())
def test_star_polygon_triangulation(n, seed, cw):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    ang = ang[np.r_[True, np.diff(ang) > 1e-3]]
    if len(ang) < 3:
        return
    r = rng.uniform(0.3, 1.0, len(ang))
    P = np.c_[r * np.cos(ang), r * np.sin(ang)]
    if cw:
        P = P[::-1]
    tris = triangulate_face(P)
    assert len(tris) == len(P) - 2
    assert math.isclose(_tri_area(P, tris), signed_area(P), rel_tol=1e-9, abs_tol=1e-12)


def test_square_with_hole():
    outer = np.array([[0, 0], [4, 0], [4, 4], [0, 4]], dtype=float)
    hole = np.array([[1, 1], [1, 3], [3, 3], [3, 1]], dtype=float)
    P = np.vstack([outer, hole])
    tris = triangulate_face(outer, [hole])
    assert len(tris) == 8
    assert math.isclose(_tri_area(P, tris), 12.0)
    assert all(_tri_area(P, [t]) > 0 for t in tris)


def test_two_holes_and_collinear_vertices():
    outer = np.array([[0, 0], [2, 0], [4, 0], [4, 4], [0, 4]], dtype=float)
    h1 = np.array([[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]])
    h2 = np.array([[2.5, 2.5], [3.5, 2.5], [3.5, 3.5], [2.5, 3.5]])
    P = np.vstack([outer, h1, h2])
    tris = triangulate_face(outer, [h1, h2])
    assert math.isclose(_tri_area(P, tris), 16 - 2)


def test_self_intersecting_rejected():
    with pytest.raises(ValidationError):
        triangulate_face([[0, 0], [1, 1], [1, 0], [0, 1]])


def test_interior_point_avoids_hole():
    outer = np.array([[0, 0], [4, 0], [4, 4], [0, 4]], dtype=float)
    hole = np.array([[0.5, 0.5], [3.5, 0.5], [3.5, 3.5], [0.5, 3.5]])
    p = interior_point(outer, [hole])
    assert not (0.5 < p[0] < 3.5 and 0.5 < p[1] < 3.5)
    assert 0 < p[0] < 4 and 0 < p[1] < 4


# --- clustering -------------------------------------------------------------

@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=30),
       st.integers(0, 1000))
def test_clusters_match_grid_oracle(cells, seed):
    # points jittered by < 1e-8 around integer sites: clusters == sites
    rng = np.random.default_rng(seed)
    P = np.array(cells, dtype=float) + rng.uniform(-1e-8, 1e-8, (len(cells), 2))
    labels, C = kd_nearest_within(P, 1e-6)
    sites = {}
    expected = [sites.setdefault(c, len(sites)) for c in cells]
    assert labels.tolist() == expected
    assert np.allclose(C, np.array(list(sites.keys()), dtype=float), atol=1e-7)


def test_cluster_eps_validation():
    with pytest.raises(ValidationError):
        kd_nearest_within(np.zeros((2, 2)), 0)
