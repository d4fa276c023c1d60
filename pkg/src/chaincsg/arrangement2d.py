"""Planar arrangements: segment intersection, regularisation and 2D TGW.

The output of :func:`planar_arrangement` is a 2-complex ``(V, d1, d2)``
whose 2-cells are the bounded faces of the arrangement.  A face may have
holes (other connected components nested inside it); the unbounded face
is implicit.
"""

import logging
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import _kernels
from .chain import SparseSignedMatrix, boundary1
from .errors import NonRegularError, ValidationError
from .geometry import EPS_VERTEX, kd_nearest_within, signed_area

log = logging.getLogger(__name__)


@dataclass
class PlanarGraph:
    """Straight-line embedded graph: points ``V`` (n, 2), edges ``EV`` (m, 2)."""

    V: np.ndarray
    EV: np.ndarray

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=float).reshape(-1, 2)
        self.EV = np.asarray(self.EV, dtype=np.int64).reshape(-1, 2)

    @property
    def nverts(self):
        return len(self.V)

    @property
    def nedges(self):
        return len(self.EV)


@dataclass
class Arrangement2D:
    """Result of :func:`planar_arrangement`.

    Attributes
    ----------
    V : (n, 2) array
    EV : (m, 2) int array
        Edge ``k`` runs from ``EV[k, 0]`` to ``EV[k, 1]``.
    d1 : SparseSignedMatrix, shape (n, m)
    d2 : SparseSignedMatrix, shape (m, f)
        Column ``j`` is the boundary of face ``j``: outer cycle
        counter-clockwise, hole cycles clockwise.
    loops : list of list of list of int
        ``loops[j][0]`` is the outer vertex loop of face ``j`` (CCW), the
        remaining entries are its holes (CW).
    outer_cycles : list of list of (int, int)
        Per connected component, the unbounded-side cycle as
        ``(edge, sign)`` pairs.
    """

    V: np.ndarray
    EV: np.ndarray
    d1: SparseSignedMatrix
    d2: SparseSignedMatrix
    loops: list
    outer_cycles: list = field(default_factory=list)

    @property
    def nfaces(self):
        return self.d2.ncols


def intersect_segments(V, EV, eps=EPS_VERTEX):
    """Split every segment at its intersections with the others.

    Parameters
    ----------
    V : (n, 2) array_like
    EV : (m, 2) array_like of int
    eps : float
        Vertex-identification tolerance.

    Returns
    -------
    PlanarGraph
        Vertices are cluster centroids ordered by first occurrence;
        duplicate and zero-length edges are removed.
    """
    V = np.asarray(V, dtype=float).reshape(-1, 2)
    EV = np.asarray(EV, dtype=np.int64).reshape(-1, 2)
    if len(EV) == 0:
        return PlanarGraph(np.zeros((0, 2)), np.zeros((0, 2), np.int64))
    P = V[EV[:, 0]]
    R = V[EV[:, 1]] - P
    seg, par = _kernels.segment_splits(P, R, eps)
    m = len(EV)
    seg = np.concatenate([np.arange(m), np.arange(m), seg])
    par = np.concatenate([np.zeros(m), np.ones(m), par])
    pts = P[seg] + par[:, None] * R[seg]
    labels, centroids = kd_nearest_within(pts, eps)
    order = np.lexsort((par, seg))
    edges = {}
    for k in range(len(order)):
        i = order[k]
        if k + 1 == len(order) or seg[order[k + 1]] != seg[i]:
            continue
        a, b = int(labels[i]), int(labels[order[k + 1]])
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in edges:
            edges[key] = (a, b)
    if not edges:
        return PlanarGraph(np.zeros((0, 2)), np.zeros((0, 2), np.int64))
    E = np.array(list(edges.values()), dtype=np.int64)
    return _compact(centroids, E)


def _compact(V, EV):
    used = np.unique(EV)
    remap = -np.ones(len(V), dtype=np.int64)
    remap[used] = np.arange(len(used))
    return PlanarGraph(V[used], remap[EV])


def regularize(graph):
    """Drop dangling edges and bridges (edges that bound no 2-cell)."""
    G = nx.Graph()
    G.add_nodes_from(range(graph.nverts))
    G.add_edges_from(map(tuple, graph.EV.tolist()))
    br = {frozenset(e) for e in nx.bridges(G)}
    if not br:
        return graph
    log.debug("regularize: removing %d bridge/dangling edges", len(br))
    keep = np.array([frozenset(e) not in br for e in graph.EV.tolist()], dtype=bool)
    if not keep.any():
        return PlanarGraph(np.zeros((0, 2)), np.zeros((0, 2), np.int64))
    return _compact(graph.V, graph.EV[keep])


def tgw2d(graph):
    """Face cycles of a planar graph by half-edge traversal.

    Each cycle keeps its face on the left.  Bounded faces therefore come out
    counter-clockwise (positive area) and every connected component also
    yields exactly one clockwise cycle around its unbounded side.

    Returns
    -------
    cycles : list of list of (int, int)
        ``(edge, sign)`` pairs; sign is +1 when the edge is walked tail to head.
    vloops : list of list of int
        Vertex sequence of each cycle.
    areas : list of float
    """
    V, EV = graph.V, graph.EV
    n = len(V)
    out = [[] for _ in range(n)]
    for k, (a, b) in enumerate(EV.tolist()):
        out[a].append((k, 1, b))
        out[b].append((k, -1, a))
    for v in range(n):
        out[v].sort(key=lambda h: (math.atan2(V[h[2], 1] - V[v, 1], V[h[2], 0] - V[v, 0]), h[0]))
    pos = {}
    for v in range(n):
        for i, (k, s, _) in enumerate(out[v]):
            pos[(k, s)] = (v, i)

    seen = set()
    cycles, vloops, areas = [], [], []
    for k in range(len(EV)):
        for s in (1, -1):
            if (k, s) in seen:
                continue
            cyc, loop = [], []
            h = (k, s)
            while h not in seen:
                seen.add(h)
                cyc.append(h)
                e, sg = h
                tail, head = (EV[e, 0], EV[e, 1]) if sg > 0 else (EV[e, 1], EV[e, 0])
                loop.append(int(tail))
                # next half-edge: clockwise neighbour of the reversed one at head
                _, i = pos[(e, -sg)]
                nk, ns, _ = out[head][i - 1]
                h = (nk, ns)
            if h != (k, s):
                raise NonRegularError("half-edge traversal did not close")
            cycles.append(cyc)
            vloops.append(loop)
            areas.append(signed_area(V[loop]))
    return cycles, vloops, areas


def planar_arrangement(V, EV, eps=EPS_VERTEX):
    """Arrange a set of 2D segments into a regular 2-complex.

    Parameters
    ----------
    V : (n, 2) array_like
    EV : (m, 2) array_like of int
    eps : float

    Returns
    -------
    Arrangement2D
    """
    g = regularize(intersect_segments(V, EV, eps))
    return arrangement_from_graph(g)


def arrangement_from_graph(g):
    n, m = g.nverts, g.nedges
    d1 = boundary1(g.EV, n) if m else SparseSignedMatrix.zeros((n, 0))
    if m == 0:
        return Arrangement2D(g.V, g.EV, d1, SparseSignedMatrix.zeros((0, 0)), [])
    cycles, vloops, areas = tgw2d(g)

    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(map(tuple, g.EV.tolist()))
    comp_of = np.empty(n, dtype=np.int64)
    comps = sorted((sorted(c) for c in nx.connected_components(G)), key=lambda c: c[0])
    for ci, c in enumerate(comps):
        comp_of[c] = ci

    bounded = [i for i, a in enumerate(areas) if a > 0]
    outer_of = {}
    for i, a in enumerate(areas):
        if a <= 0:
            c = int(comp_of[vloops[i][0]])
            if c in outer_of:
                raise NonRegularError(f"component {c} has more than one unbounded cycle")
            outer_of[c] = i
    # Euler check per component, counting its unbounded face
    nf = np.zeros(len(comps), dtype=np.int64)
    for i in bounded:
        nf[comp_of[vloops[i][0]]] += 1
    ne = np.bincount(comp_of[g.EV[:, 0]], minlength=len(comps))
    for ci, c in enumerate(comps):
        chi = len(c) - ne[ci] + nf[ci] + 1
        if chi != 2 or ci not in outer_of:
            raise NonRegularError(f"planar component {ci} has Euler characteristic {chi}")

    columns = [{e: s for e, s in cycles[i]} for i in bounded]
    loops = [[vloops[i]] for i in bounded]
    face_comp = [int(comp_of[vloops[i][0]]) for i in bounded]
    face_area = [areas[i] for i in bounded]

    if len(comps) > 1:
        segs_of = []
        for i in bounded:
            lp = vloops[i]
            a, b = g.V[lp], g.V[np.roll(lp, -1)]
            segs_of.append(np.hstack([a, b]))
        for ci in range(len(comps)):
            probe = g.V[comps[ci][0]][None, :]
            best, best_area = None, np.inf
            for j in range(len(bounded)):
                if face_comp[j] == ci or face_area[j] >= best_area:
                    continue
                if _kernels.points_in_polygon(probe, segs_of[j], 0.0)[0] == 1:
                    best, best_area = j, face_area[j]
            if best is not None:
                hole = outer_of[ci]
                for e, s in cycles[hole]:
                    columns[best][e] = s
                loops[best].append(vloops[hole])
    d2 = SparseSignedMatrix.from_columns(columns, m)
    return Arrangement2D(g.V, g.EV, d1, d2, loops, [cycles[outer_of[c]] for c in range(len(comps))])
