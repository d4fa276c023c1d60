"""Both kernel backends against each other and against brute-force oracles."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaincsg import _kernels as K
from chaincsg.geometry import FaceTable, plane_frame

TOL = 1e-9


def _exact_crossings(P, R):
    """Exact proper crossings of integer segments: {(i, j): (t, u)}."""
    out = {}
    n = len(P)
    for i in range(n):
        for j in range(i + 1, n):
            px, py = map(Fraction, P[i])
            rx, ry = map(Fraction, R[i])
            qx, qy = map(Fraction, P[j])
            sx, sy = map(Fraction, R[j])
            d = rx * sy - ry * sx
            if d == 0:
                continue
            t = ((qx - px) * sy - (qy - py) * sx) / d
            u = ((qx - px) * ry - (qy - py) * rx) / d
            if 0 < t < 1 and 0 < u < 1:
                out[(i, j)] = (float(t), float(u))
    return out


def _splits_by_segment(seg, par):
    d = {}
    for s, t in zip(seg.tolist(), par.tolist()):
        d.setdefault(s, []).append(t)
    return {k: sorted(v) for k, v in d.items()}


segments = st.lists(st.tuples(*[st.integers(-20, 20)] * 4), min_size=2, max_size=25)


@given(segments)
def test_segment_splits_backends_agree(segs):
    S = np.array(segs, dtype=float)
    P, R = S[:, :2], S[:, 2:] - S[:, :2]
    a = K.segment_splits_numba(P, R, TOL)
    b = K.segment_splits_numpy(P, R, TOL)
    assert np.array_equal(a[0], b[0])
    assert np.allclose(a[1], b[1], atol=1e-12)


@given(segments)
def test_segment_splits_find_all_proper_crossings(segs):
    S = np.array(segs, dtype=float)
    P, R = S[:, :2], S[:, 2:] - S[:, :2]
    found = _splits_by_segment(*K.segment_splits(P, R, TOL))
    for (i, j), (t, u) in _exact_crossings(P, R).items():
        assert any(abs(x - t) < 1e-9 for x in found.get(i, []))
        assert any(abs(x - u) < 1e-9 for x in found.get(j, []))


def test_collinear_overlap_reports_endpoints():
    # [0,2] and [1,3] on the x axis: each contains one endpoint of the other
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    R = np.array([[2.0, 0.0], [2.0, 0.0]])
    got = _splits_by_segment(*K.segment_splits(P, R, TOL))
    assert got == {0: [0.5], 1: [0.5]}


def test_t_junction():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    R = np.array([[2.0, 0.0], [0.0, 1.0]])
    got = _splits_by_segment(*K.segment_splits(P, R, TOL))
    assert got == {0: [0.5], 1: [0.0]}


def _convex_oracle(pts, poly):
    """Strictly inside a CCW convex polygon."""
    n = len(poly)
    out = np.ones(len(pts), dtype=bool)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        out &= (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0]) > 1e-9
    return out


@pytest.mark.parametrize("seed", range(5))
def test_points_in_polygon_matches_convex_oracle(seed):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, 7))
    poly = np.c_[np.cos(ang), np.sin(ang)] * rng.uniform(0.5, 2)
    segs = np.hstack([poly, np.roll(poly, -1, axis=0)])
    pts = rng.uniform(-2, 2, (500, 2))
    a = K.points_in_polygon_numba(pts, segs, 1e-12)
    b = K.points_in_polygon_numpy(pts, segs, 1e-12)
    assert np.array_equal(a, b)
    assert np.array_equal(a == 1, _convex_oracle(pts, poly))


def test_points_on_boundary_flagged():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    segs = np.hstack([sq, np.roll(sq, -1, axis=0)])
    got = K.points_in_polygon(np.array([[0.5, 0.0], [1, 1], [0.5, 0.5], [2, 2]]), segs, 1e-9)
    assert got.tolist() == [-1, -1, 1, 0]


def _unit_cube_table():
    quads = [[(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)], [(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)],
             [(0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)], [(0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)],
             [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)], [(1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)]]
    frames, segs = [], []
    for q in quads:
        q = np.array(q, dtype=float)
        frames.append(plane_frame(q))
        segs.append(np.stack([q, np.roll(q, -1, axis=0)], axis=1))
    return FaceTable(frames, segs)


@pytest.mark.parametrize("seed", range(4))
def test_ray_crossings_backends_and_box_oracle(seed):
    table = _unit_cube_table()
    rng = np.random.default_rng(seed)
    faces = np.arange(6)
    for p in rng.uniform(-0.5, 1.5, (200, 3)):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        args = (p, d, faces, table.normals, table.origins, table.U, table.W, table.ptr,
                table.segs, 1e-12)
        a = K.ray_crossings_numba(*args)
        b = K.ray_crossings_numpy(*args)
        assert a == b
        if a >= 0:
            assert (a % 2 == 1) == bool(np.all((p > 0) & (p < 1)))


def test_ray_grazing_edge_is_degenerate():
    table = _unit_cube_table()
    # ray through the edge x=1, z=1 of the cube
    p = np.array([0.5, 0.5, 0.5])
    d = np.array([1.0, 0.0, 1.0]) / np.sqrt(2)
    assert K.ray_crossings(p, d, np.arange(6), table, 1e-9) == -1


def test_backend_flag():
    assert K.BACKEND in ("numba", "numpy")
