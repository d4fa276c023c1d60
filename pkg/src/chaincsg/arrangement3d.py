"""Space arrangement of a collection of polyhedral solids.

Pipeline::

    fragment_face (per input face, parallel)
      -> accumulate (block-diagonal)
      -> chain_congruence (merge coincident vertices / edges / faces)
      -> tgw3d (closed 2-cycles)
      -> cycles_to_boundaries (atoms and the outer cell)

All faces carry an explicit unit normal; a face's column in ``d2`` walks
its outer loop counter-clockwise about that normal.  Columns of ``d3``
use outward-pointing face orientations.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .arrangement2d import planar_arrangement
from .chain import SparseSignedMatrix, boundary1, check_exactness
from .errors import (ClassificationError, ExactnessError, GeometryError,
                     NonRegularError, NonWatertightError, ValidationError)
from .geometry import (EPS_VERTEX, Box, FaceTable, PlaneFrame, build_index,
                       interior_point, kd_nearest_within, plane_frame)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# input face soup
# ---------------------------------------------------------------------------

@dataclass
class FaceSoup:
    """Faces of all input solids, flattened.

    Attributes
    ----------
    V : (n, 3) array
    EV : (m, 2) int array
    faces : list of list of int
        Global edge ids bounding each face.
    fverts : list of list of int
        Global vertex ids of each face.
    solid : (f,) int array
        Index of the input solid owning each face.
    frames : list of PlaneFrame
    boxes : list of Box
    """

    V: np.ndarray
    EV: np.ndarray
    faces: list
    fverts: list
    solid: np.ndarray
    frames: list
    boxes: list

    @classmethod
    def from_models(cls, models, eps=EPS_VERTEX):
        Vs, EVs, faces, fverts, solid = [], [], [], [], []
        nv = ne = 0
        for k, m in enumerate(models):
            if m.dim != 3 or m.FV is None:
                raise ValidationError(f"solid {k} is not a 3D model with faces")
            Vs.append(m.V)
            EVs.append(np.asarray(m.EV, dtype=np.int64).reshape(-1, 2) + nv)
            for fe, fv in zip(m.face_edges(), m.FV):
                if len(fe) < 3:
                    raise ValidationError(f"solid {k}: face {list(fv)} has fewer than 3 edges")
                faces.append([e + ne for e in fe])
                fverts.append([v + nv for v in fv])
                solid.append(k)
            nv += len(m.V)
            ne += len(m.EV)
        V = np.vstack(Vs) if Vs else np.zeros((0, 3))
        EV = np.vstack(EVs) if EVs else np.zeros((0, 2), np.int64)
        frames = [plane_frame(V[fv]) for fv in fverts]
        boxes = [Box.of(V[fv]).expanded(eps) for fv in fverts]
        return cls(V, EV, faces, fverts, np.asarray(solid, dtype=np.int64), frames, boxes)

    def __len__(self):
        return len(self.faces)

    def segments(self, f):
        e = self.EV[self.faces[f]]
        return np.stack([self.V[e[:, 0]], self.V[e[:, 1]]], axis=1)

    def face_table(self, ids=None):
        ids = range(len(self)) if ids is None else ids
        return FaceTable([self.frames[f] for f in ids], [self.segments(f) for f in ids])


# ---------------------------------------------------------------------------
# fragmentation
# ---------------------------------------------------------------------------

@dataclass
class LocalComplex:
    """Fragments of one input face.

    ``d1`` is (k verts x edges), ``d2`` (edges x fragments); the coboundaries
    of the local complex are their transposes.
    """

    V: np.ndarray
    EV: np.ndarray
    d1: SparseSignedMatrix
    d2: SparseSignedMatrix
    normal: np.ndarray
    areas: np.ndarray
    points: np.ndarray
    nloops: list
    source: int = -1

    @property
    def nfaces(self):
        return self.d2.ncols

    @property
    def delta0(self):
        return self.d1.T

    @property
    def delta1(self):
        return self.d2.T


def _trace(frame, soup, tau, eps):
    """Segments of ``tau ∩ plane(frame)`` in the frame's 2D coordinates."""
    segs = soup.segments(tau)
    dist = (segs - frame.origin) @ frame.normal
    if np.all(np.abs(dist) <= eps):
        loc = frame.to_local(segs.reshape(-1, 3))[:, :2]
        return loc.reshape(-1, 2, 2)
    out = []
    pts = []
    for (a, b), (da, db) in zip(segs, dist):
        ona, onb = abs(da) <= eps, abs(db) <= eps
        if ona:
            pts.append(a)
        if onb:
            pts.append(b)
        if ona and onb:
            out.append(frame.to_local(np.array([a, b]))[:, :2])
        elif not ona and not onb and da * db < 0:
            pts.append(a + (da / (da - db)) * (b - a))
    if len(pts) < 2:
        return np.array(out).reshape(-1, 2, 2)
    P = np.array(pts)
    tf = soup.frames[tau]
    line = np.cross(frame.normal, tf.normal)
    ln = np.linalg.norm(line)
    if ln < 1e-12:
        return np.array(out).reshape(-1, 2, 2)
    s = P @ (line / ln)
    order = np.argsort(s, kind="stable")
    P, s = P[order], s[order]
    keep = np.concatenate([[True], np.diff(s) > eps])
    P = P[keep]
    if len(P) >= 2:
        mids = 0.5 * (P[:-1] + P[1:])
        tloc = tf.to_local(segs.reshape(-1, 3))[:, :2].reshape(-1, 4)
        inside = _kernels.points_in_polygon(tf.to_local(mids)[:, :2], tloc, eps)
        loc = frame.to_local(P)[:, :2]
        for k in np.nonzero(inside != 0)[0]:
            out.append(loc[k:k + 2])
    return np.array(out).reshape(-1, 2, 2)


def fragment_face(sigma, soup, index, eps=EPS_VERTEX):
    """Split input face ``sigma`` by every face whose box meets its box.

    Parameters
    ----------
    sigma : int
    soup : FaceSoup
    index : IntervalTreeSet
        Box index over ``soup.boxes``.

    Returns
    -------
    LocalComplex
    """
    frame = soup.frames[sigma]
    own = soup.segments(sigma)
    own2 = frame.to_local(own.reshape(-1, 3))[:, :2].reshape(-1, 2, 2)
    pieces = [own2]
    for tau in index.query(soup.boxes[sigma]):
        if tau != sigma:
            tr = _trace(frame, soup, tau, eps)
            if len(tr):
                pieces.append(tr)
    S = np.concatenate(pieces)
    V2 = S.reshape(-1, 2)
    EV = np.arange(len(V2)).reshape(-1, 2)
    arr = planar_arrangement(V2, EV, eps)

    own_segs = own2.reshape(-1, 4)
    keep, pts, areas, nloops = [], [], [], []
    for j, loops in enumerate(arr.loops):
        outer = arr.V[loops[0]]
        holes = [arr.V[h] for h in loops[1:]]
        p = interior_point(outer, holes)
        if _kernels.points_in_polygon(p[None, :], own_segs, 0.0)[0] != 1:
            continue
        keep.append(j)
        pts.append(p)
        area = _poly_area(outer) - sum(_poly_area(h) for h in holes)
        areas.append(area)
        nloops.append(len(loops))
    if not keep:
        raise GeometryError(f"face {sigma} produced no fragments")
    d2 = arr.d2.select_columns(keep).tocsc()
    used_e = np.unique(d2.indices)
    emap = -np.ones(arr.EV.shape[0], dtype=np.int64)
    emap[used_e] = np.arange(len(used_e))
    EV = arr.EV[used_e]
    used_v = np.unique(EV)
    vmap = -np.ones(len(arr.V), dtype=np.int64)
    vmap[used_v] = np.arange(len(used_v))
    EV = vmap[EV]
    d2c = d2.tocoo()
    d2 = SparseSignedMatrix(emap[d2c.row], d2c.col, d2c.data, (len(used_e), len(keep)))
    return LocalComplex(
        V=frame.to_world(arr.V[used_v]),
        EV=EV,
        d1=boundary1(EV, len(used_v)),
        d2=d2,
        normal=frame.normal.copy(),
        areas=np.asarray(areas),
        points=frame.to_world(np.array(pts)),
        nloops=nloops,
        source=sigma,
    )


def _poly_area(P):
    q = np.roll(P, -1, axis=0)
    return abs(0.5 * float(np.sum(P[:, 0] * q[:, 1] - q[:, 0] * P[:, 1])))


# ---------------------------------------------------------------------------
# accumulation and congruence
# ---------------------------------------------------------------------------

@dataclass
class AccumulatorPair:
    W: np.ndarray
    EV: np.ndarray
    Delta0: SparseSignedMatrix
    Delta1: SparseSignedMatrix
    normals: np.ndarray
    areas: np.ndarray
    points: np.ndarray
    nloops: np.ndarray
    source: np.ndarray
    voffsets: np.ndarray


def accumulate(locals_):
    """Stack local complexes into block-diagonal coboundary matrices."""
    if not locals_:
        raise ValidationError("nothing to accumulate")
    W = np.vstack([lc.V for lc in locals_])
    nv = np.cumsum([0] + [len(lc.V) for lc in locals_])
    EV = np.vstack([lc.EV + o for lc, o in zip(locals_, nv)])
    D0 = sp.block_diag([lc.delta0.tocsc() for lc in locals_], format="csc")
    D1 = sp.block_diag([lc.delta1.tocsc() for lc in locals_], format="csc")
    acc = AccumulatorPair(
        W=W, EV=EV,
        Delta0=SparseSignedMatrix.from_scipy(D0),
        Delta1=SparseSignedMatrix.from_scipy(D1),
        normals=np.vstack([np.tile(lc.normal, (lc.nfaces, 1)) for lc in locals_]),
        areas=np.concatenate([lc.areas for lc in locals_]),
        points=np.vstack([lc.points for lc in locals_]),
        nloops=np.concatenate([lc.nloops for lc in locals_]).astype(np.int64),
        source=np.concatenate([[lc.source] * lc.nfaces for lc in locals_]).astype(np.int64),
        voffsets=nv,
    )
    ok, wit = check_exactness(acc.Delta0.T, acc.Delta1.T)
    if not ok:
        raise ExactnessError(f"accumulator is not exact at {wit}")
    return acc


@dataclass
class QuotientComplex:
    V: np.ndarray
    EV: np.ndarray
    d1: SparseSignedMatrix
    d2: SparseSignedMatrix
    normals: np.ndarray
    areas: np.ndarray
    points: np.ndarray
    nloops: np.ndarray
    source: list

    @property
    def delta0(self):
        return self.d1.T

    @property
    def delta1(self):
        return self.d2.T


def chain_congruence(acc, eps=EPS_VERTEX):
    """Quotient the accumulated complex by ε-congruence of its cells.

    Vertices within ``eps`` are merged to their centroid, edges with equal
    endpoints merged (collapsed edges are dropped and logged) and faces with
    equal boundary up to sign merged.  Face normals, areas and interior
    points follow their faces; a face merged with sign -1 keeps the normal
    of its first occurrence.
    """
    labels, V = kd_nearest_within(acc.W, eps)
    a = labels[acc.EV[:, 0]]
    b = labels[acc.EV[:, 1]]
    collapsed = a == b
    if collapsed.any():
        log.info("congruence: dropping %d collapsed edges", int(collapsed.sum()))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    esign = np.where(a < b, 1, -1)
    edge_id = -np.ones(len(a), dtype=np.int64)
    seen = {}
    for k in np.nonzero(~collapsed)[0]:
        key = (int(lo[k]), int(hi[k]))
        if key not in seen:
            seen[key] = len(seen)
        edge_id[k] = seen[key]
    EV = np.array(list(seen.keys()), dtype=np.int64).reshape(-1, 2)

    D1 = acc.Delta1.tocsc().tocsr()  # faces x edges
    face_key = {}
    cols, normals, areas, points, nloops, source = [], [], [], [], [], []
    for f in range(D1.shape[0]):
        lo_, hi_ = D1.indptr[f], D1.indptr[f + 1]
        col = {}
        for e, s in zip(D1.indices[lo_:hi_], D1.data[lo_:hi_]):
            ne = edge_id[e]
            if ne < 0:
                continue
            col[ne] = col.get(ne, 0) + int(s) * int(esign[e])
        col = {e: s for e, s in col.items() if s}
        if not col:
            log.info("congruence: dropping collapsed face %d", f)
            continue
        if any(abs(s) > 1 for s in col.values()):
            raise ExactnessError(f"face {f} uses an edge twice after congruence")
        items = tuple(sorted(col.items()))
        sgn = 1 if items[0][1] > 0 else -1
        key = tuple((e, s * sgn) for e, s in items)
        if key in face_key:
            source[face_key[key]].append(int(acc.source[f]))
            continue
        face_key[key] = len(cols)
        cols.append(col)
        normals.append(acc.normals[f])
        areas.append(acc.areas[f])
        points.append(acc.points[f])
        nloops.append(acc.nloops[f])
        source.append([int(acc.source[f])])
    used = np.unique(EV) if len(EV) else np.zeros(0, np.int64)
    if len(used) != len(V):
        # vertices only touched by collapsed edges
        vmap = -np.ones(len(V), dtype=np.int64)
        vmap[used] = np.arange(len(used))
        V, EV = V[used], vmap[EV]
    d1 = boundary1(EV, len(V))
    d2 = SparseSignedMatrix.from_columns(cols, len(EV))
    ok, wit = check_exactness(d1, d2)
    if not ok:
        raise ExactnessError(f"quotient complex is not exact at {wit}")
    return QuotientComplex(V, EV, d1, d2, np.array(normals).reshape(-1, 3),
                           np.asarray(areas), np.array(points).reshape(-1, 3),
                           np.asarray(nloops, dtype=np.int64), source)


# ---------------------------------------------------------------------------
# TGW in 3D
# ---------------------------------------------------------------------------

def tgw3d(d2, V, EV, normals):
    """Closed 2-cycles of a quotient complex by radial face ordering.

    Around every edge the incident faces are sorted by angle; each pair of
    angular neighbours bounds one wedge, and the two faces are glued into the
    same cycle with the orientations that point out of the wedge.

    Returns
    -------
    SparseSignedMatrix
        ``d3_plus``, faces x cycles.  Every face appears in exactly two
        columns with opposite signs.
    """
    F = d2.ncols
    rows = d2.tocsc().tocsr()
    parent = np.arange(2 * F)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        x, y = find(x), find(y)
        if x != y:
            if x < y:
                parent[y] = x
            else:
                parent[x] = y

    # oriented face (f, o) -> node 2f (o=+1) or 2f+1 (o=-1)
    node = lambda f, o: 2 * f + (0 if o > 0 else 1)
    for e in range(rows.shape[0]):
        lo, hi = rows.indptr[e], rows.indptr[e + 1]
        fs = rows.indices[lo:hi]
        ss = rows.data[lo:hi].astype(np.int64)
        if len(fs) == 0:
            continue
        if len(fs) == 1:
            raise NonWatertightError(
                f"edge {e} (vertices {EV[e, 0]}, {EV[e, 1]}) bounds a single face")
        t = V[EV[e, 1]] - V[EV[e, 0]]
        t = t / np.linalg.norm(t)
        w = ss[:, None] * np.cross(normals[fs], t)
        ref = w[0] - (w[0] @ t) * t
        ref /= np.linalg.norm(ref)
        ref2 = np.cross(t, ref)
        ang = np.arctan2(w @ ref2, w @ ref)
        order = np.lexsort((fs, ang))
        fs, ss = fs[order], ss[order]
        k = len(fs)
        for i in range(k):
            j = (i + 1) % k
            union(node(fs[i], -ss[i]), node(fs[j], ss[j]))

    roots = np.array([find(x) for x in range(2 * F)])
    uniq = np.unique(roots)
    col_of = {r: i for i, r in enumerate(uniq)}
    r = np.repeat(np.arange(F), 2)
    c = np.array([col_of[x] for x in roots], dtype=np.int64)
    v = np.tile([1, -1], F)
    d3p = SparseSignedMatrix(r, c, v, (F, len(uniq)))
    dup = d3p.tocsc()
    if np.any(np.abs(dup.data) > 1) or dup.nnz != 2 * F:
        raise NonRegularError("a face is used twice by the same cycle")
    ok, wit = check_exactness(d2, d3p)
    if not ok:
        raise ExactnessError(f"tgw3d produced a non-closed cycle at {wit}")
    return d3p


# ---------------------------------------------------------------------------
# cycles to boundaries
# ---------------------------------------------------------------------------

def _face_components(d2):
    """Connected components of faces glued along shared edges."""
    m = d2.tocsc()
    inc = sp.csc_matrix((np.ones_like(m.data, dtype=np.int8), m.indices, m.indptr), shape=m.shape)
    adj = (inc.T @ inc).tocsr()
    n, lab = sp.csgraph.connected_components(adj, directed=False)
    _, first = np.unique(lab, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(n)
    return remap[lab]


def cycle_volume(column, normals, areas, points):
    """Signed volume enclosed by a 2-cycle with the given face orientations."""
    f = np.fromiter(column.keys(), dtype=np.int64)
    o = np.fromiter(column.values(), dtype=np.float64)
    return float(np.sum(o * areas[f] * np.einsum("ij,ij->i", points[f], normals[f])) / 3.0)


class _CellTester:
    """Ray-parity point-in-cell queries over the faces of a quotient complex."""

    def __init__(self, q, seed=0, eps=EPS_VERTEX):
        self.eps = eps
        frames = []
        segs = []
        for f in range(q.d2.ncols):
            n = q.normals[f]
            k = int(np.argmin(np.abs(n)))
            u = np.zeros(3)
            u[k] = 1.0
            u = u - (u @ n) * n
            u /= np.linalg.norm(u)
            frames.append(PlaneFrame(q.points[f], u, np.cross(n, u), n))
            e = q.EV[list(q.d2.column(f))]
            segs.append(np.stack([q.V[e[:, 0]], q.V[e[:, 1]]], axis=1))
        self.table = FaceTable(frames, segs)
        self.rng = np.random.default_rng(seed)
        self.tol = eps * 1e-2

    def inside(self, p, faces, attempts=8):
        faces = np.asarray(faces, dtype=np.int64)
        for _ in range(attempts):
            d = self.rng.normal(size=3)
            d /= np.linalg.norm(d)
            c = _kernels.ray_crossings(p, d, faces, self.table, self.tol)
            if c >= 0:
                return bool(c % 2)
        raise ClassificationError(f"ray casting from {p} stayed degenerate")


def cycles_to_boundaries(d3p, q, seed=0, eps=EPS_VERTEX):
    """Turn the closed cycles of ``tgw3d`` into cell boundaries.

    In each face-connected component the outer cycle is the one whose
    vertices reach the component's bounding box on every axis and whose
    enclosed signed volume is negative; it bounds the unbounded side.
    Outer cycles of components nested inside a bounded cell of another
    component are added to that cell's column (cavity shells).

    Returns
    -------
    d3 : SparseSignedMatrix
        Faces x bounded cells.
    outer : dict
        Signed face chain of the unbounded cell.
    info : dict
        ``components`` (per-face component id), ``outer_cycles`` and
        ``parent`` (enclosing cell per component, -1 for the outer cell).
    """
    comp = _face_components(q.d2)
    ncomp = int(comp.max()) + 1 if len(comp) else 0
    cols = d3p.columns()
    ccomp = [int(comp[next(iter(c))]) for c in cols]
    vols = [cycle_volume(c, q.normals, q.areas, q.points) for c in cols]

    d1c = q.d1.tocsc()
    def verts_of(col):
        e = q.EV[list(set().union(*[q.d2.column(f).keys() for f in col]))]
        return np.unique(e)

    outer_of = {}
    for ci in range(ncomp):
        members = [j for j in range(len(cols)) if ccomp[j] == ci]
        vs = verts_of(set().union(*[cols[j].keys() for j in members]))
        lo, hi = q.V[vs].min(axis=0), q.V[vs].max(axis=0)
        cands = sorted(members, key=lambda j: (-len(cols[j]), vols[j], j))
        chosen = None
        for j in cands:
            P = q.V[verts_of(cols[j].keys())]
            reach = np.all(np.abs(P.min(axis=0) - lo) <= eps) and \
                np.all(np.abs(P.max(axis=0) - hi) <= eps)
            if reach and vols[j] < 0:
                chosen = j
                break
        if chosen is None:
            raise NonRegularError(f"component {ci} has no outer cycle")
        outer_of[ci] = chosen

    inner = [j for j in range(len(cols)) if j not in set(outer_of.values())]
    new_cols = [dict(cols[j]) for j in inner]
    parent = {}
    if ncomp > 1:
        tester = _CellTester(q, seed, eps)
        for ci in range(ncomp):
            probe = q.V[verts_of(cols[outer_of[ci]].keys())[0]]
            best, best_vol = -1, np.inf
            for k, j in enumerate(inner):
                if ccomp[j] == ci or vols[j] >= best_vol:
                    continue
                if tester.inside(probe, list(cols[j].keys())):
                    best, best_vol = k, vols[j]
            parent[ci] = best
        for ci in range(ncomp):
            if parent[ci] >= 0:
                new_cols[parent[ci]].update(cols[outer_of[ci]])
    else:
        parent = {ci: -1 for ci in range(ncomp)}
    outer = {}
    for ci in range(ncomp):
        if parent[ci] < 0:
            outer.update(cols[outer_of[ci]])
    d3 = SparseSignedMatrix.from_columns(new_cols, q.d2.ncols)
    ok, wit = check_exactness(q.d2, d3)
    if not ok:
        raise ExactnessError(f"cell boundaries are not closed at {wit}")
    return d3, outer, {"components": comp, "outer_cycles": [outer_of[c] for c in range(ncomp)],
                       "parent": [parent[c] for c in range(ncomp)], "volumes": vols}


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------

@dataclass
class Atom:
    index: int
    column: dict
    box: Box
    witness: np.ndarray
    volume: float


def witness_point(column, q, tester, diag, retries=5):
    """Point strictly inside the cell bounded by ``column``.

    Offsets the interior point of the cell's largest face inward by
    ``1e-4 * diag`` and validates it by ray parity against the cell's own
    faces, shrinking the offset tenfold on failure.
    """
    faces = sorted(column, key=lambda f: (-q.areas[f], f))
    flist = list(column)
    for f in faces:
        inward = -column[f] * q.normals[f]
        tau = 1e-4 * diag
        for _ in range(retries + 1):
            p = q.points[f] + tau * inward
            try:
                if tester.inside(p, flist):
                    return p
            except ClassificationError:
                pass
            tau /= 10
    raise ClassificationError("could not find an interior witness point")


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

@dataclass
class Arrangement3D:
    """Global space arrangement of a set of solids."""

    V: np.ndarray
    EV: np.ndarray
    d1: SparseSignedMatrix
    d2: SparseSignedMatrix
    d3: SparseSignedMatrix
    d3_plus: SparseSignedMatrix
    outer: dict
    normals: np.ndarray
    atoms: list
    soup: FaceSoup = None
    meta: dict = field(default_factory=dict)

    def counts(self):
        """``(V, E, F, C)`` with ``C`` including the outer cell."""
        return (len(self.V), len(self.EV), self.d2.ncols, self.d3.ncols + 1)

    @property
    def d3_with_outer(self):
        """``d3`` with the outer cell prepended as column 0."""
        return SparseSignedMatrix.from_columns([self.outer] + self.d3.columns(), self.d2.ncols)

    def validate(self):
        for a, b in ((self.d1, self.d2), (self.d2, self.d3), (self.d2, self.d3_plus)):
            ok, wit = check_exactness(a, b)
            if not ok:
                raise ExactnessError(f"boundary of boundary is non-zero at {wit}")
        return True


def _contractible(q, d3, outer, comp):
    """All faces single-loop, one connected component, every cell a sphere-like shell."""
    if np.any(q.nloops != 1) or (len(comp) and comp.max() > 0):
        return False
    for col in d3.columns() + [outer]:
        fs = list(col)
        es = set()
        for f in fs:
            es.update(q.d2.column(f))
        vs = np.unique(q.EV[list(es)])
        if len(vs) - len(es) + len(fs) != 2:
            return False
    return True


def _face_holes(f, d2, EV):
    """Boundary loops of face ``f`` minus one (loops are disjoint edge cycles)."""
    es = np.fromiter(d2.column(f).keys(), dtype=np.int64)
    vs, inv = np.unique(EV[es], return_inverse=True)
    inv = inv.reshape(-1, 2)
    g = sp.coo_matrix((np.ones(len(es)), (inv[:, 0], inv[:, 1])), shape=(len(vs),) * 2)
    return sp.csgraph.connected_components(g, directed=False)[0] - 1


def euler_defect(d2, EV, cells):
    """Expected ``V - E + F - C`` of a 3D arrangement.

    Summing compactly supported Euler characteristics of the open cells of
    the 3-sphere gives ``V - E + F - C = sum_f h_f + sum_c (chi(dc)/2 - 1)``,
    where ``h_f`` counts the holes of face ``f`` and ``chi(dc)`` is the Euler
    characteristic of the closed surface bounding cell ``c``.  Ball-like
    cells bounded by disk faces contribute 0, so the defect is 0 exactly
    when the arrangement is contractible.

    Parameters
    ----------
    d2 : SparseSignedMatrix
    EV : (E, 2) int array
    cells : list of dict
        Signed face columns of every cell, the outer cell included.
    """
    holes = {}
    for col in cells:
        for f in col:
            if f not in holes:
                holes[f] = _face_holes(f, d2, EV)
    total = sum(holes.values())
    for col in cells:
        es = set()
        for f in col:
            es.update(d2.column(f))
        nv = len(np.unique(EV[list(es)])) if es else 0
        chi = nv - len(es) + sum(1 - holes[f] for f in col)
        total += chi // 2 - 1
    return int(total)


def space_arrangement(models, eps=EPS_VERTEX, threads=1, seed=0):
    """Arrange a list of :class:`~chaincsg.chain.LarModel` solids in 3D.

    Parameters
    ----------
    models : sequence of LarModel
    eps : float
        Vertex-identification tolerance.
    threads : int
        Worker threads for face fragmentation; output does not depend on it.
    seed : int
        Seed of the ray directions used for witness validation.

    Returns
    -------
    Arrangement3D
    """
    soup = FaceSoup.from_models(models, eps)
    index = build_index(soup.boxes)
    work = lambda s: fragment_face(s, soup, index, eps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            locals_ = list(ex.map(work, range(len(soup))))
    else:
        locals_ = [work(s) for s in range(len(soup))]
    acc = accumulate(locals_)
    q = chain_congruence(acc, eps)
    d3p = tgw3d(q.d2, q.V, q.EV, q.normals)
    d3, outer, info = cycles_to_boundaries(d3p, q, seed, eps)

    tester = _CellTester(q, seed + 1, eps)
    diag = Box.of(q.V).diagonal
    atoms = []
    for j, col in enumerate(d3.columns()):
        vs = np.unique(q.EV[list(set().union(*[q.d2.column(f).keys() for f in col]))])
        atoms.append(Atom(j, col, Box.of(q.V[vs]), witness_point(col, q, tester, diag),
                          cycle_volume(col, q.normals, q.areas, q.points)))

    arr = Arrangement3D(q.V, q.EV, q.d1, q.d2, d3, d3p, outer, q.normals, atoms, soup)
    contractible = _contractible(q, d3, outer, info["components"])
    V_, E_, F_, C_ = arr.counts()
    euler = V_ - E_ + F_ - C_
    defect = euler_defect(q.d2, q.EV, [outer] + d3.columns())
    if euler != defect:
        log.warning("Euler identity violated: V-E+F-C = %d, expected %d", euler, defect)
    arr.meta.update(info)
    arr.meta.update(contractible=contractible, euler=euler, euler_defect=defect, nloops=q.nloops,
                    areas=q.areas, points=q.points, source=q.source)
    return arr
