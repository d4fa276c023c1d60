"""Spatial indexing, affine maps, plane frames and polygon triangulation."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from .errors import DegenerateFaceError, ValidationError

log = logging.getLogger(__name__)

EPS_VERTEX = 1e-6
EPS_PREDICATE = 1e-9


@dataclass(frozen=True)
class Box:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float)
        hi = np.asarray(self.max, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValidationError(f"invalid box {lo} .. {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @classmethod
    def of(cls, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(pts.min(axis=0), pts.max(axis=0))

    def expanded(self, tol):
        return Box(self.min - tol, self.max + tol)

    def overlaps(self, other):
        return bool(np.all(self.min <= other.max) and np.all(other.min <= self.max))

    @property
    def diagonal(self):
        return float(np.linalg.norm(self.max - self.min))


class IntervalTree:
    """Static centred interval tree over closed intervals ``[lo, hi]``."""

    __slots__ = ("center", "by_lo", "by_hi", "left", "right")

    def __init__(self, lo, hi, ids):
        ends = np.concatenate([lo, hi])
        self.center = float(np.median(ends))
        here = (lo <= self.center) & (hi >= self.center)
        left = hi < self.center
        right = lo > self.center
        h_ids, h_lo, h_hi = ids[here], lo[here], hi[here]
        o = np.argsort(h_lo, kind="stable")
        self.by_lo = (h_lo[o], h_ids[o])
        o = np.argsort(-h_hi, kind="stable")
        self.by_hi = (h_hi[o], h_ids[o])
        self.left = IntervalTree(lo[left], hi[left], ids[left]) if left.any() else None
        self.right = IntervalTree(lo[right], hi[right], ids[right]) if right.any() else None

    def query(self, qlo, qhi, out):
        node = self
        stack = [node]
        while stack:
            node = stack.pop()
            if qhi < node.center:
                vals, ids = node.by_lo
                out.extend(ids[: np.searchsorted(vals, qhi, side="right")].tolist())
                if node.left is not None:
                    stack.append(node.left)
            elif qlo > node.center:
                vals, ids = node.by_hi
                out.extend(ids[: np.searchsorted(-vals, -qlo, side="right")].tolist())
                if node.right is not None:
                    stack.append(node.right)
            else:
                out.extend(node.by_lo[1].tolist())
                if node.left is not None:
                    stack.append(node.left)
                if node.right is not None:
                    stack.append(node.right)
        return out


class IntervalTreeSet:
    """One interval tree per axis; a box query intersects the per-axis hits."""

    def __init__(self, boxes):
        self.boxes = list(boxes)
        self.dim = len(self.boxes[0].min) if self.boxes else 0
        ids = np.arange(len(self.boxes))
        if self.boxes:
            lo = np.array([b.min for b in self.boxes])
            hi = np.array([b.max for b in self.boxes])
            self.trees = [IntervalTree(lo[:, k], hi[:, k], ids) for k in range(self.dim)]
        else:
            self.trees = []

    def __len__(self):
        return len(self.boxes)

    def query(self, box, axes=None):
        """Ids of boxes overlapping ``box`` on every axis in ``axes``."""
        if not self.trees:
            return []
        axes = range(self.dim) if axes is None else axes
        hits = None
        for k in axes:
            found = set(self.trees[k].query(box.min[k], box.max[k], []))
            hits = found if hits is None else hits & found
            if not hits:
                return []
        return sorted(hits)


def build_index(boxes):
    return IntervalTreeSet(boxes)


# ---------------------------------------------------------------------------
# affine maps
# ---------------------------------------------------------------------------

class AffineMap:
    """Homogeneous ``(d+1) x (d+1)`` matrix acting on row points."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        d = m.shape[0] - 1
        if m.shape != (d + 1, d + 1) or d not in (2, 3):
            raise ValidationError(f"affine matrix must be 3x3 or 4x4, got {m.shape}")
        if not np.allclose(m[d], np.eye(d + 1)[d]):
            raise ValidationError("last row of an affine matrix must be (0,...,0,1)")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self):
        return self.matrix.shape[0] - 1

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim + 1))

    def __matmul__(self, other):
        return AffineMap(self.matrix @ other.matrix)

    def apply(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = self.dim
        return pts @ self.matrix[:d, :d].T + self.matrix[:d, d]

    def is_invertible(self, tol=1e-12):
        return abs(np.linalg.det(self.matrix[:-1, :-1])) > tol

    def inverse(self):
        if not self.is_invertible():
            raise ValidationError("singular affine map")
        return AffineMap(np.linalg.inv(self.matrix))

    def __repr__(self):
        return f"AffineMap({self.matrix.tolist()})"


def translate(*v):
    d = len(v)
    m = np.eye(d + 1)
    m[:d, d] = v
    return AffineMap(m)


def scale(*v):
    return AffineMap(np.diag(list(v) + [1.0]))


def _rot3(axis, a):
    c, s = math.cos(a), math.sin(a)
    m = np.eye(4)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    m[i, i], m[i, j], m[j, i], m[j, j] = c, -s, s, c
    return m


def rotate(*angles):
    """``rotate(a)`` in 2D; ``rotate(ax, ay, az)`` rotates about x, then y, then z."""
    if len(angles) == 1:
        c, s = math.cos(angles[0]), math.sin(angles[0])
        return AffineMap([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    if len(angles) != 3:
        raise ValidationError("rotate takes 1 (2D) or 3 (3D) angles")
    m = np.eye(4)
    for axis, a in enumerate(angles):
        if a:
            m = _rot3(axis, a) @ m
    return AffineMap(m)


# ---------------------------------------------------------------------------
# plane frames
# ---------------------------------------------------------------------------

def newell_normal(loop):
    p = np.asarray(loop, dtype=float)
    q = np.roll(p, -1, axis=0)
    return np.array([
        np.sum((p[:, 1] - q[:, 1]) * (p[:, 2] + q[:, 2])),
        np.sum((p[:, 2] - q[:, 2]) * (p[:, 0] + q[:, 0])),
        np.sum((p[:, 0] - q[:, 0]) * (p[:, 1] + q[:, 1])),
    ]) / 2.0


@dataclass(frozen=True)
class PlaneFrame:
    """Orthonormal frame mapping a face's supporting plane onto ``z = 0``."""

    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    normal: np.ndarray

    @property
    def rotation(self):
        return np.vstack([self.u, self.v, self.normal])

    def to_local(self, points):
        return (np.atleast_2d(points) - self.origin) @ self.rotation.T

    def to_world(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] == 2:
            pts = np.hstack([pts, np.zeros((len(pts), 1))])
        return pts @ self.rotation + self.origin

    def flipped(self):
        return PlaneFrame(self.origin, self.v, self.u, -self.normal)


def plane_frame(points, tol=EPS_PREDICATE):
    """Frame of the best-fit plane through ``points``.

    When the points are given as a cyclic loop the normal follows the
    right-hand rule of that loop; otherwise its sign is canonicalised.
    Raises :class:`DegenerateFaceError` for (near) collinear input.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 3:
        raise DegenerateFaceError("a face needs at least 3 points in 3D")
    origin = P.mean(axis=0)
    Q = P - origin
    diam = float(np.max(np.linalg.norm(Q, axis=1))) * 2
    if diam == 0:
        raise DegenerateFaceError("face collapses to a point")
    _, s, vt = np.linalg.svd(Q, full_matrices=False)
    if s[1] <= tol * diam * math.sqrt(len(P)):
        raise DegenerateFaceError("face vertices are collinear")
    n = vt[2]
    nw = newell_normal(P)
    if np.linalg.norm(nw) > tol * diam * diam:
        if nw @ n < 0:
            n = -n
    else:
        k = int(np.argmax(np.abs(n)))
        if n[k] < 0:
            n = -n
    u = vt[0] - (vt[0] @ n) * n
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return PlaneFrame(origin, u, v, n / np.linalg.norm(n))


# ---------------------------------------------------------------------------
# polygons
# ---------------------------------------------------------------------------

def signed_area(loop):
    p = np.asarray(loop, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_cross(a, b, c, d, tol):
    """Proper crossing of open segments ``ab`` and ``cd``."""
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    return ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
           ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol))


def _point_on_segment(p, a, b, tol):
    ab = b - a
    l2 = ab @ ab
    if l2 == 0:
        return np.linalg.norm(p - a) <= tol
    t = np.clip((p - a) @ ab / l2, 0, 1)
    return np.linalg.norm(a + t * ab - p) <= tol


def _loop_self_intersects(P, tol):
    n = len(P)
    for i in range(n):
        a, b = P[i], P[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(a, b, P[j], P[(j + 1) % n], tol):
                return True
    return False


def _inside_polygon(p, P):
    inside = False
    n = len(P)
    for i in range(n):
        a, b = P[i], P[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            if a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]) > p[0]:
                inside = not inside
    return inside


def triangulate_face(outer, holes=(), tol=EPS_PREDICATE):
    """Ear-clipping triangulation of a polygon with holes.

    Parameters
    ----------
    outer : (n, 2) array_like
        Outer loop, either orientation.
    holes : sequence of (m, 2) array_like
        Hole loops strictly inside ``outer``.

    Returns
    -------
    list of (i, j, k)
        Indices into the concatenation ``outer + holes[0] + holes[1] ...``,
        wound like ``outer``.
    """
    loops = [np.asarray(outer, dtype=float)] + [np.asarray(h, dtype=float) for h in holes]
    pts = np.vstack(loops)
    scale_ = max(float(np.ptp(pts, axis=0).max()), 1e-300)
    atol = tol * scale_ * scale_
    offsets = np.cumsum([0] + [len(l) for l in loops])
    for k, l in enumerate(loops):
        if len(l) < 3:
            raise ValidationError(f"loop {k} has fewer than 3 vertices")
        if _loop_self_intersects(l, atol):
            raise ValidationError(f"loop {k} self-intersects")
    outer_ccw = signed_area(loops[0]) > 0

    def ring(k, ccw):
        idx = list(range(offsets[k], offsets[k + 1]))
        if (signed_area(loops[k]) > 0) != ccw:
            idx.reverse()
        return idx

    poly = ring(0, True)
    hole_rings = [ring(k, False) for k in range(1, len(loops))]
    hole_rings.sort(key=lambda r: -max(pts[i, 0] for i in r))
    for h in hole_rings:
        poly = _bridge_hole(poly, h, pts, atol)

    tris = _ear_clip(poly, pts, atol)
    if not outer_ccw:
        tris = [(a, c, b) for a, b, c in tris]
    return tris


def _bridge_hole(poly, hole, pts, atol):
    hv = max(hole, key=lambda i: (pts[i, 0], -pts[i, 1]))
    hpos = hole.index(hv)
    h = pts[hv]
    cands = sorted(range(len(poly)), key=lambda k: (np.sum((pts[poly[k]] - h) ** 2), k))
    edges = [(poly[k], poly[(k + 1) % len(poly)]) for k in range(len(poly))]
    edges += [(hole[k], hole[(k + 1) % len(hole)]) for k in range(len(hole))]
    for k in cands:
        v = pts[poly[k]]
        if np.allclose(v, h):
            continue
        blocked = False
        for a, b in edges:
            if _segments_cross(h, v, pts[a], pts[b], atol):
                blocked = True
                break
            for w in (a, b):
                if w in (poly[k], hv):
                    continue
                if not np.allclose(pts[w], v) and not np.allclose(pts[w], h) and \
                        _point_on_segment(pts[w], h, v, math.sqrt(atol)):
                    blocked = True
                    break
            if blocked:
                break
        if blocked:
            continue
        # bridge must leave v into the polygon interior
        prev, nxt = pts[poly[k - 1]], pts[poly[(k + 1) % len(poly)]]
        if not _in_cone(prev, v, nxt, h):
            continue
        spliced = hole[hpos:] + hole[:hpos] + [hv, poly[k]]
        return poly[: k + 1] + spliced + poly[k + 1:]
    raise ValidationError("could not bridge hole to outer loop")


def _in_cone(prev, v, nxt, p):
    """Is ``p`` inside the interior angle at ``v`` of a CCW polygon?"""
    if _cross(prev, v, nxt) >= 0:  # convex
        return _cross(v, nxt, p) > 0 and _cross(prev, v, p) > 0 or \
            (_cross(v, nxt, p) >= 0 and _cross(prev, v, p) >= 0)
    return not (_cross(v, nxt, p) <= 0 and _cross(prev, v, p) <= 0)


def _ear_clip(poly, pts, atol):
    idx = list(poly)
    tris = []
    guard = 0
    while len(idx) > 3:
        n = len(idx)
        clipped = False
        for k in range(n):
            a, b, c = idx[k - 1], idx[k], idx[(k + 1) % n]
            pa, pb, pc = pts[a], pts[b], pts[c]
            if _cross(pa, pb, pc) <= atol:
                continue
            ok = True
            for w in idx:
                pw = pts[w]
                if w in (a, b, c) or np.array_equal(pw, pa) or np.array_equal(pw, pb) \
                        or np.array_equal(pw, pc):
                    continue
                if _cross(pa, pb, pw) >= -atol and _cross(pb, pc, pw) >= -atol \
                        and _cross(pc, pa, pw) >= -atol:
                    ok = False
                    break
            if ok:
                tris.append((a, b, c))
                del idx[k]
                clipped = True
                break
        if not clipped:
            # only degenerate (collinear) corners remain
            for k in range(len(idx)):
                a, b, c = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
                if abs(_cross(pts[a], pts[b], pts[c])) <= atol:
                    del idx[k]
                    clipped = True
                    break
        if not clipped:
            raise ValidationError("ear clipping failed; polygon is not simple")
        guard += 1
    if len(idx) == 3 and _cross(pts[idx[0]], pts[idx[1]], pts[idx[2]]) > atol:
        tris.append(tuple(idx))
    return tris


def interior_point(outer, holes=()):
    """A point strictly inside a polygon with holes (centroid of its largest triangle)."""
    loops = [np.asarray(outer, dtype=float)] + [np.asarray(h, dtype=float) for h in holes]
    pts = np.vstack(loops)
    tris = triangulate_face(outer, holes)
    if not tris:
        raise DegenerateFaceError("polygon has no area")
    areas = [abs(_cross(pts[a], pts[b], pts[c])) for a, b, c in tris]
    a, b, c = tris[int(np.argmax(areas))]
    return (pts[a] + pts[b] + pts[c]) / 3.0


# ---------------------------------------------------------------------------
# vertex clustering
# ---------------------------------------------------------------------------

def kd_nearest_within(points, eps=EPS_VERTEX):
    """Cluster points under the transitive closure of ``dist <= 2 * eps``.

    Returns
    -------
    labels : (n,) int array
        Cluster id per point, numbered by first occurrence.
    centroids : (k, d) array
        Mean of each cluster.
    """
    if eps <= 0:
        raise ValidationError("eps must be positive")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(P)
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros((0, P.shape[1] if P.ndim == 2 else 3))
    pairs = cKDTree(P).query_pairs(2 * eps, output_type="ndarray")
    g = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, raw = connected_components(g, directed=False)
    # renumber by first occurrence so output is independent of scipy internals
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    labels = remap[raw]
    k = len(order)
    centroids = np.zeros((k, P.shape[1]))
    np.add.at(centroids, labels, P)
    centroids /= np.bincount(labels, minlength=k)[:, None]
    big = np.bincount(labels, minlength=k) > 1
    if big.any():
        spread = np.zeros(k)
        np.maximum.at(spread, labels, np.linalg.norm(P - centroids[labels], axis=1))
        if np.any(spread > 2 * eps):
            log.warning("%d vertex clusters exceed diameter 2*eps", int(np.sum(spread > 2 * eps)))
    return labels, centroids


# ---------------------------------------------------------------------------
# face table for ray casting
# ---------------------------------------------------------------------------

class FaceTable:
    """Planar faces flattened into arrays for :func:`_kernels.ray_crossings`.

    Each face is given as a frame plus its boundary segments in 3D; holes
    need no special treatment because the even-odd rule is applied to
    the whole segment soup of the face.
    """

    def __init__(self, frames, face_segments):
        F = len(frames)
        self.normals = np.ascontiguousarray([f.normal for f in frames], dtype=float).reshape(F, 3)
        self.origins = np.ascontiguousarray([f.origin for f in frames], dtype=float).reshape(F, 3)
        self.U = np.ascontiguousarray([f.u for f in frames], dtype=float).reshape(F, 3)
        self.W = np.ascontiguousarray([f.v for f in frames], dtype=float).reshape(F, 3)
        ptr = [0]
        segs = []
        boxes = []
        for fr, s3 in zip(frames, face_segments):
            s3 = np.asarray(s3, dtype=float).reshape(-1, 2, 3)
            a = fr.to_local(s3[:, 0])[:, :2]
            b = fr.to_local(s3[:, 1])[:, :2]
            segs.append(np.hstack([a, b]))
            ptr.append(ptr[-1] + len(s3))
            boxes.append(Box.of(s3.reshape(-1, 3)))
        self.ptr = np.asarray(ptr, dtype=np.int64)
        self.segs = np.ascontiguousarray(np.vstack(segs) if segs else np.zeros((0, 4)))
        self.boxes = boxes
        self.index = IntervalTreeSet(boxes)

    def __len__(self):
        return len(self.boxes)
