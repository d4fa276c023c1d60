import math

import numpy as np
import pytest

from chaincsg.errors import ValidationError
from chaincsg.primitives import cube, cuboid, cuboid_grid, cylinder, polygon, rect, sphere


def _volume(m):
    """Divergence-theorem volume from fan triangulation of each face."""
    vol = 0.0
    for f in m.FV:
        P = m.V[list(f)]
        for i in range(1, len(P) - 1):
            vol += np.dot(P[0], np.cross(P[i], P[i + 1])) / 6
    return vol


def _counts(m):
    return len(m.V), len(m.EV), len(m.FV)


@pytest.mark.parametrize("model, counts, volume", [
    (cube(), (8, 12, 6), 1.0),
    (cuboid((2, 3, 4), (1, 1, 1)), (8, 12, 6), 24.0),
    (cuboid_grid((1, 1, 1)), (8, 12, 6), 1.0),
    (cuboid_grid((2, 1, 1)), (12, 20, 10), 2.0),
    (cuboid_grid((2, 2, 2)), (26, 48, 24), 8.0),
    (cylinder(16), (32, 48, 18), 16 / 2 * math.sin(2 * math.pi / 16) * 2),
    (cylinder(6, 2.0, 1.0, 3), (24, 30, 8), 6 / 2 * 4 * math.sin(math.pi / 3)),
    (sphere(8, 4), (26, 56, 32), None),
])
def test_counts_euler_and_orientation(model, counts, volume):
    assert _counts(model) == counts
    V, E, F = counts
    assert V - E + F == 2
    vol = _volume(model)
    assert vol > 0
    if volume is not None:
        assert vol == pytest.approx(volume)


def test_sphere_inscribed():
    s = sphere(24, 12)
    assert np.allclose(np.linalg.norm(s.V, axis=1), 1.0)
    assert 0.9 * 4 / 3 * math.pi < _volume(s) < 4 / 3 * math.pi


def test_cylinder_seam_vertices_shared():
    c = cylinder(4, 1, 1, 2)
    assert all(len(f) == 6 for f in c.FV[2:])
    assert len(c.FV) == 6


def test_2d_shapes():
    r = rect(0, 0, 2, 1)
    assert r.dim == 2 and len(r.EV) == 4
    p = polygon([(0, 0), (1, 0), (0, 1)])
    assert len(p.EV) == 3
    g = cuboid_grid((2, 3))
    assert len(g.EV) == 10
    # shoelace over directed edges: the boundary runs counter-clockwise
    area = sum(g.V[a][0] * g.V[b][1] - g.V[b][0] * g.V[a][1] for a, b in g.EV) / 2
    assert area == pytest.approx(6.0)


@pytest.mark.parametrize("bad", [lambda: cylinder(2), lambda: sphere(3, 1), lambda: rect(0, 0, 0, 1),
                                 lambda: cuboid((1, -1, 1)), lambda: cuboid_grid((0, 1, 1)),
                                 lambda: polygon([(0, 0), (1, 1)])])
def test_invalid_parameters(bad):
    with pytest.raises(ValidationError):
        bad()
