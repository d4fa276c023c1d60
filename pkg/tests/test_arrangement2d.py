import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaincsg.arrangement2d import PlanarGraph, intersect_segments, planar_arrangement, regularize, tgw2d
from chaincsg.chain import check_exactness
from chaincsg.geometry import signed_area

from conftest import DATA1_EV, DATA1_V
from test_chain import EF_T


def _segments(segs):
    S = np.asarray(segs, dtype=float).reshape(-1, 2, 2)
    return S.reshape(-1, 2), np.arange(2 * len(S)).reshape(-1, 2)


def _face_areas(arr):
    out = []
    for loops in arr.loops:
        out.append(signed_area(arr.V[loops[0]]) + sum(signed_area(arr.V[h]) for h in loops[1:]))
    return np.array(out)


def test_data1_reproduces_unsigned_boundary():
    arr = planar_arrangement(DATA1_V, np.array(DATA1_EV) - 1)
    assert arr.V.shape == (12, 2) and arr.EV.shape == (14, 2)
    assert np.array_equal(np.abs(arr.d2.toarray()).T, EF_T)
    assert check_exactness(arr.d1, arr.d2)[0]


@pytest.mark.parametrize("n, m", [(2, 2), (3, 4), (5, 2)])
def test_line_grid_counts(n, m):
    # n horizontal and m vertical full-width lines
    segs = [[(0, y), (m - 1, y)] for y in range(n)] + [[(x, 0), (x, n - 1)] for x in range(m)]
    arr = planar_arrangement(*_segments(segs))
    assert len(arr.V) == n * m
    assert len(arr.EV) == n * (m - 1) + m * (n - 1)
    assert arr.nfaces == (n - 1) * (m - 1)
    assert np.allclose(_face_areas(arr), 1.0)


def test_two_rectangles_overlap():
    segs = [[(0, 0), (2, 0)], [(2, 0), (2, 1)], [(2, 1), (0, 1)], [(0, 1), (0, 0)],
            [(1, .5), (3, .5)], [(3, .5), (3, 1.5)], [(3, 1.5), (1, 1.5)], [(1, 1.5), (1, .5)]]
    arr = planar_arrangement(*_segments(segs))
    assert (len(arr.V), len(arr.EV), arr.nfaces) == (10, 12, 3)
    assert sorted(_face_areas(arr)) == pytest.approx([0.5, 1.5, 1.5])


def test_nested_component_becomes_hole():
    segs = [[(0, 0), (4, 0)], [(4, 0), (4, 4)], [(4, 4), (0, 4)], [(0, 4), (0, 0)],
            [(1, 1), (2, 1)], [(2, 1), (2, 2)], [(2, 2), (1, 2)], [(1, 2), (1, 1)]]
    arr = planar_arrangement(*_segments(segs))
    assert arr.nfaces == 2
    holed = [lp for lp in arr.loops if len(lp) == 2]
    assert len(holed) == 1
    assert sorted(_face_areas(arr)) == pytest.approx([1.0, 15.0])
    assert check_exactness(arr.d1, arr.d2)[0]


def test_dangling_edges_removed():
    segs = [[(0, 0), (1, 0)], [(1, 0), (1, 1)], [(1, 1), (0, 1)], [(0, 1), (0, 0)],
            [(1, 1), (2, 2)], [(0.5, 0.5), (0.6, 0.5)]]
    arr = planar_arrangement(*_segments(segs))
    assert (len(arr.V), len(arr.EV), arr.nfaces) == (4, 4, 1)


def test_bridge_between_squares_removed():
    g = PlanarGraph([(0, 0), (1, 0), (1, 1), (0, 1), (2, 0), (3, 0), (3, 1), (2, 1)],
                    [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (1, 4)])
    assert regularize(g).nedges == 8


def test_tgw2d_orientation():
    g = PlanarGraph([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1), (1, 2), (2, 3), (3, 0)])
    cycles, loops, areas = tgw2d(g)
    assert sorted(areas) == [-1.0, 1.0]
    inner = cycles[int(np.argmax(areas))]
    assert dict(inner) == {0: 1, 1: 1, 2: 1, 3: 1}


def test_duplicate_and_overlapping_segments():
    segs = [[(0, 0), (2, 0)], [(1, 0), (3, 0)], [(0, 0), (2, 0)], [(3, 0), (3, 1)],
            [(3, 1), (0, 1)], [(0, 1), (0, 0)]]
    arr = planar_arrangement(*_segments(segs))
    assert arr.nfaces == 1
    assert _face_areas(arr) == pytest.approx([3.0])


def test_empty_input():
    arr = planar_arrangement(np.zeros((0, 2)), np.zeros((0, 2), int))
    assert arr.nfaces == 0


def test_intersection_points_clustered():
    g = intersect_segments(*_segments([[(0, 0), (2, 2)], [(0, 2), (2, 0)], [(1, 0), (1, 2)]]))
    assert len(g.V) == 7  # 6 endpoints + one triple crossing
    assert g.nedges == 6


@given(st.lists(st.tuples(*[st.integers(0, 8)] * 4).filter(lambda s: s[:2] != s[2:]),
                min_size=1, max_size=14))
def test_random_segments_are_exact_and_tile(segs):
    S = np.array(segs, dtype=float).reshape(-1, 2, 2)
    arr = planar_arrangement(*_segments(S))
    assert check_exactness(arr.d1, arr.d2)[0]
    if arr.nfaces:
        assert np.all(_face_areas(arr) > 0)
        # every edge bounds one or two faces, with opposite signs when two
        rows = arr.d2.tocsc().tocsr()
        for e in range(rows.shape[0]):
            vals = rows.data[rows.indptr[e]:rows.indptr[e + 1]]
            assert len(vals) in (1, 2)
            if len(vals) == 2:
                assert vals.sum() == 0
