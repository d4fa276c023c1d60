"""Closed polyhedral primitives as :class:`~chaincsg.chain.LarModel` values.

Face vertex lists are emitted in counter-clockwise order seen from outside.
"""

import math

import numpy as np

from .chain import LarModel
from .errors import ValidationError


def _edges_of_faces(FV):
    seen = {}
    for f in FV:
        for a, b in zip(f, f[1:] + f[:1]):
            key = (min(a, b), max(a, b))
            if key not in seen:
                seen[key] = key
    return list(seen.values())


def _model(V, FV):
    FV = [list(f) for f in FV]
    return LarModel(np.asarray(V, dtype=float), _edges_of_faces(FV), FV)


def cuboid(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    """Axis-aligned box ``[origin, origin + size]``."""
    return cuboid_grid((1, 1, 1), size=size, origin=origin)


def cube():
    """The unit cube ``[0, 1]^3``."""
    return cuboid()


def cuboid_grid(shape, size=None, origin=(0.0, 0.0, 0.0)):
    """Boundary of an ``m x n x p`` grid of unit cubes.

    Only the squares on the outer boundary are emitted, so the result is a
    closed surface suitable as one solid.  ``size`` rescales the grid to the
    given extent (default: ``shape`` itself).
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 2:
        return _rect_grid(shape, size, origin)
    if len(shape) != 3 or min(shape) < 1:
        raise ValidationError(f"cuboid_grid needs 3 positive dimensions, got {shape}")
    ext = np.asarray(shape if size is None else size, dtype=float)
    if np.any(ext <= 0):
        raise ValidationError("cuboid size must be positive")
    m, n, p = shape
    vid = {}
    V = []

    def v(i, j, k):
        key = (i, j, k)
        if key not in vid:
            vid[key] = len(V)
            V.append(np.asarray(origin) + ext * (i / m, j / n, k / p))
        return vid[key]

    FV = []
    for i in range(m):
        for j in range(n):
            FV.append([v(i, j, 0), v(i, j + 1, 0), v(i + 1, j + 1, 0), v(i + 1, j, 0)])
            FV.append([v(i, j, p), v(i + 1, j, p), v(i + 1, j + 1, p), v(i, j + 1, p)])
    for i in range(m):
        for k in range(p):
            FV.append([v(i, 0, k), v(i + 1, 0, k), v(i + 1, 0, k + 1), v(i, 0, k + 1)])
            FV.append([v(i, n, k), v(i, n, k + 1), v(i + 1, n, k + 1), v(i + 1, n, k)])
    for j in range(n):
        for k in range(p):
            FV.append([v(0, j, k), v(0, j, k + 1), v(0, j + 1, k + 1), v(0, j + 1, k)])
            FV.append([v(m, j, k), v(m, j + 1, k), v(m, j + 1, k + 1), v(m, j, k + 1)])
    return _model(V, FV)


def _rect_grid(shape, size, origin):
    m, n = shape
    if min(shape) < 1:
        raise ValidationError("grid dimensions must be positive")
    ext = np.asarray(shape if size is None else size, dtype=float)
    o = np.asarray(origin, dtype=float)[:2]
    V = [o + ext * (i / m, j / n) for i in range(m + 1) for j in range(n + 1)]
    idx = lambda i, j: i * (n + 1) + j
    EV = [(idx(i, 0), idx(i + 1, 0)) for i in range(m)] + \
         [(idx(m, j), idx(m, j + 1)) for j in range(n)] + \
         [(idx(i + 1, n), idx(i, n)) for i in range(m)] + \
         [(idx(0, j + 1), idx(0, j)) for j in range(n)]
    return LarModel(np.asarray(V), EV)


def cylinder(n=16, r=1.0, h=2.0, k=1):
    """Prism approximating a cylinder of radius ``r`` and height ``h``.

    The lateral surface has ``n`` quads spanning the full height and each
    end is a single ``n``-gon, so there are always ``n + 2`` faces.  ``k``
    inserts ``k - 1`` collinear seam vertices along each vertical edge;
    they belong to both adjacent quads.
    """
    n, k = int(n), int(k)
    if n < 3:
        raise ValidationError("cylinder needs n >= 3")
    if k < 1 or r <= 0 or h <= 0:
        raise ValidationError("cylinder needs k >= 1, r > 0, h > 0")
    ang = 2 * math.pi * np.arange(n) / n
    V = []
    col = []
    for i in range(n):
        ids = []
        for s in range(k + 1):
            ids.append(len(V))
            V.append((r * math.cos(ang[i]), r * math.sin(ang[i]), h * s / k))
        col.append(ids)
    FV = [[col[i][0] for i in reversed(range(n))], [col[i][k] for i in range(n)]]
    for i in range(n):
        j = (i + 1) % n
        FV.append([col[i][0]] + col[j] + list(reversed(col[i][1:])))
    return _model(V, FV)


def sphere(n=16, m=8, r=1.0):
    """Latitude-longitude polyhedron with ``n`` meridians and ``m`` bands.

    The two polar bands are triangles; the others are planar trapezoids.
    """
    n, m = int(n), int(m)
    if n < 3 or m < 2 or r <= 0:
        raise ValidationError("sphere needs n >= 3, m >= 2, r > 0")
    V = [(0.0, 0.0, -r)]
    rings = []
    for i in range(1, m):
        phi = -math.pi / 2 + math.pi * i / m
        ids = []
        for j in range(n):
            th = 2 * math.pi * j / n
            ids.append(len(V))
            V.append((r * math.cos(phi) * math.cos(th), r * math.cos(phi) * math.sin(th),
                      r * math.sin(phi)))
        rings.append(ids)
    V.append((0.0, 0.0, r))
    south, north = 0, len(V) - 1
    FV = []
    for j in range(n):
        jj = (j + 1) % n
        FV.append([south, rings[0][jj], rings[0][j]])
        for b in range(m - 2):
            lo, hi = rings[b], rings[b + 1]
            FV.append([lo[j], lo[jj], hi[jj], hi[j]])
        FV.append([rings[-1][j], rings[-1][jj], north])
    return _model(V, FV)


def rect(x, y, w, h):
    """2D rectangle boundary as a 4-edge model."""
    if w <= 0 or h <= 0:
        raise ValidationError("rectangle needs positive size")
    V = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
    return LarModel(np.asarray(V, dtype=float), [(0, 1), (1, 2), (2, 3), (3, 0)])


def polygon(points):
    """Closed 2D polygon boundary."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(P) < 3:
        raise ValidationError("polygon needs >= 3 points")
    n = len(P)
    return LarModel(P, [(i, (i + 1) % n) for i in range(n)])
