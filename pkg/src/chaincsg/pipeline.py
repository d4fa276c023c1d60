"""End-to-end orchestration: arrange, classify, evaluate, export."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .arrangement2d import PlanarGraph, arrangement_from_graph, planar_arrangement
from .arrangement3d import euler_defect, space_arrangement, tgw3d
from .boolean import (BitChain, BoolMatrix, boundary_chain, boundary_counts,
                      brep_extract, classify_atoms, eval_bitwise)
from .chain import SparseSignedMatrix, check_exactness, euler_characteristic
from .dsl import parse_program
from .errors import DimensionError, ValidationError
from .geometry import EPS_VERTEX, interior_point
from .io import ComplexFile, shapes_to_segments

log = logging.getLogger(__name__)


@dataclass
class Scene:
    """An arrangement together with the classification of its atoms."""

    complex: object
    boolmatrix: BoolMatrix

    @property
    def dim(self):
        return self.complex.V.shape[1]

    @property
    def top(self):
        """Boundary operator of the atoms (``d3`` in 3D, ``d2`` in 2D)."""
        return self.complex.d3 if self.dim == 3 else self.complex.d2


def arrange_models(named, eps=EPS_VERTEX, threads=1, seed=0):
    """Space arrangement plus classification of named 3D models."""
    names = [n for n, _ in named]
    arr = space_arrangement([m for _, m in named], eps=eps, threads=threads, seed=seed)
    return Scene(arr, classify_atoms(arr, names, seed=seed, threads=threads))


def arrange_shapes(shapes, eps=EPS_VERTEX):
    """Planar arrangement of SVG shapes; closed shapes become solids."""
    V, EV = shapes_to_segments(shapes)
    arr = planar_arrangement(V, EV, eps)
    solids = [s for s in shapes if s.closed]
    wit = [interior_point(arr.V[lp[0]], [arr.V[h] for h in lp[1:]]) for lp in arr.loops]
    bits = np.zeros((len(wit) + 1, len(solids) + 1), dtype=bool)
    bits[0, 0] = True
    if wit:
        W = np.array(wit)
        for j, s in enumerate(solids):
            bits[1:, j + 1] = _kernels.points_in_polygon(W, s.segments().reshape(-1, 4), 0.0) == 1
    arr.witnesses = wit
    return Scene(arr, BoolMatrix(bits, [s.name for s in solids]))


def to_container(scene):
    c = scene.complex
    if scene.dim == 3:
        return ComplexFile(c.V, c.d1, c.d2, c.d3, c.normals, dict(c.outer),
                           list(scene.boolmatrix.names), scene.boolmatrix.bits)
    return ComplexFile(c.V, c.d1, c.d2, None, None, {},
                       list(scene.boolmatrix.names), scene.boolmatrix.bits)


def from_container(cf):
    if cf.boolmatrix is None or not cf.names:
        raise ValidationError("complex container has no classification (NAMES/BOOLMATRIX)")
    top = cf.d3 if cf.dim == 3 else cf.d2
    if top is None:
        raise ValidationError("3D complex container has no d3")
    if cf.boolmatrix.shape[0] != top.ncols + 1:
        raise DimensionError("BOOLMATRIX rows do not match the atom count")
    if cf.dim == 3 and cf.normals is None:
        raise ValidationError("3D complex container has no NORMALS")
    return Scene(cf, BoolMatrix(cf.boolmatrix, list(cf.names)))


@dataclass
class Result:
    expr: object
    chain: BitChain
    boundary: np.ndarray
    counts: tuple
    mesh: object = None
    components: list = None

    @property
    def euler(self):
        return euler_characteristic(self.counts)


def evaluate(scene, text):
    """Evaluate a CSG program over a scene and extract its boundary."""
    expr = parse_program(text)
    chain = eval_bitwise(expr, scene.boolmatrix.chains())
    bnd = boundary_chain(chain, scene.top)
    c = scene.complex
    if scene.dim == 3:
        counts = boundary_counts(bnd, c)
        mesh = brep_extract(bnd, c)
        return Result(expr, chain, bnd, counts, mesh)
    res = c.d1 @ bnd
    if np.any(res):
        raise ValidationError("2D boundary chain is not a cycle")
    counts, comps = planar_boundary_counts(bnd, c)
    return Result(expr, chain, bnd, counts, None, comps)


def planar_boundary_counts(chain, arr):
    """Counts of the regularised complex bounded by a 2D edge chain.

    The selected edges are re-arranged on their own; construction fails
    unless every connected component satisfies ``V - E + F = 2`` with its
    unbounded face counted.

    Returns
    -------
    counts : (int, int, int)
        ``(V, E, F)`` with bounded faces only.
    components : list of (int, int, int)
        ``(V, E, F)`` per connected component, ``F`` including the
        component's unbounded face.
    """
    edges = np.nonzero(chain)[0]
    if not len(edges):
        return (0, 0, 0), []
    EV = arr.EV[edges]
    used = np.unique(EV)
    remap = -np.ones(len(arr.V), dtype=np.int64)
    remap[used] = np.arange(len(used))
    g = PlanarGraph(arr.V[used], remap[EV])
    sub = arrangement_from_graph(g)
    comps = []
    ncomp, lab = connected_components(
        sp.coo_matrix((np.ones(len(g.EV)), (g.EV[:, 0], g.EV[:, 1])), shape=(g.nverts,) * 2),
        directed=False)
    face_lab = [lab[lp[0][0]] for lp in sub.loops]
    for c in range(ncomp):
        comps.append((int(np.sum(lab == c)), int(np.sum(lab[g.EV[:, 0]] == c)),
                      int(sum(1 for f in face_lab if f == c)) + 1))
    return (len(sub.V), len(sub.EV), sub.nfaces), comps


def invariant_report(c):
    """Invariant suite of a 3D complex (arrangement or container)."""
    rep = {}
    ok, wit = check_exactness(c.d1, c.d2)
    rep["d1d2_zero"] = ok
    if getattr(c, "d3", None) is not None:
        ok, wit = check_exactness(c.d2, c.d3)
        rep["d2d3_zero"] = ok
    if c.V.shape[1] == 3 and getattr(c, "normals", None) is not None:
        d3p = tgw3d(c.d2, c.V, c.EV, c.normals)
        rep.update(d3_plus_report(c.d2, d3p))
        C = c.d3.ncols + 1 if c.d3 is not None else None
        if C is not None:
            rep["euler"] = len(c.V) - c.d1.ncols + c.d2.ncols - C
            rep["euler_expected"] = euler_defect(c.d2, c.EV, [dict(c.outer)] + c.d3.columns())
            rep["euler_identity"] = rep["euler"] == rep["euler_expected"]
    return rep


def d3_plus_report(d2, d3p):
    m = d3p.tocsc()
    rows = m.tocsr()
    per_row = np.diff(rows.indptr)
    sums = np.asarray(rows.sum(axis=1)).ravel()
    ok, _ = check_exactness(d2, d3p)
    return {
        "d3_plus_columns": d3p.ncols,
        "d3_plus_cycles": ok,
        "d3_plus_rows_two_opposite": bool(np.all(per_row == 2) and np.all(sums == 0)),
    }
