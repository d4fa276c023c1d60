"""Atom classification, bitwise CSG evaluation and boundary extraction."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .chain import SparseSignedMatrix
from .dsl import Complement, Diff, Intersect, Leaf, Union
from .errors import (ClassificationError, DimensionError, UnboundedResultError,
                     ValidationError)
from .geometry import Box, plane_frame, signed_area, triangulate_face

log = logging.getLogger(__name__)

_ONE = np.uint64(1)


class BitChain:
    """Bit vector over the bounded atoms, plus a flag for the outer cell Ω.

    Bits are packed little-endian into ``uint64`` words; unused high bits of
    the last word are always zero.  Complement flips every bounded bit and
    the Ω flag, so De Morgan's laws hold exactly.
    """

    __slots__ = ("words", "n", "outer")

    def __init__(self, words, n, outer=False):
        self.words = np.asarray(words, dtype=np.uint64)
        self.n = int(n)
        self.outer = bool(outer)
        if len(self.words) != _nwords(self.n):
            raise DimensionError("word count does not match length")

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(_nwords(n), np.uint64), n)

    @classmethod
    def from_bools(cls, bits, outer=False):
        b = np.asarray(bits, dtype=bool).ravel()
        n = len(b)
        padded = np.zeros(_nwords(n) * 64, dtype=bool)
        padded[:n] = b
        words = np.packbits(padded.reshape(-1, 8), axis=1, bitorder="little")
        return cls(words.reshape(-1, 8).view(np.uint64).ravel().copy(), n, outer)

    @classmethod
    def from_indices(cls, idx, n, outer=False):
        b = np.zeros(n, dtype=bool)
        b[list(idx)] = True
        return cls.from_bools(b, outer)

    def to_bools(self):
        if self.n == 0:
            return np.zeros(0, dtype=bool)
        by = self.words.view(np.uint8)
        return np.unpackbits(by, bitorder="little")[: self.n].astype(bool)

    def indices(self):
        return np.nonzero(self.to_bools())[0]

    def count(self):
        return int(sum(bin(int(w)).count("1") for w in self.words))

    def _check(self, other):
        if not isinstance(other, BitChain):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"bit chains have lengths {self.n} and {other.n}")
        return None

    def __or__(self, other):
        self._check(other)
        return BitChain(self.words | other.words, self.n, self.outer or other.outer)

    def __and__(self, other):
        self._check(other)
        return BitChain(self.words & other.words, self.n, self.outer and other.outer)

    def __sub__(self, other):
        self._check(other)
        return BitChain(self.words & ~other.words, self.n, self.outer and not other.outer)

    def __xor__(self, other):
        self._check(other)
        return BitChain(self.words ^ other.words, self.n, self.outer != other.outer)

    def __invert__(self):
        w = ~self.words
        r = self.n % 64
        if r and len(w):
            w[-1] &= (_ONE << np.uint64(r)) - _ONE
        return BitChain(w, self.n, not self.outer)

    def __eq__(self, other):
        return isinstance(other, BitChain) and self.n == other.n and \
            self.outer == other.outer and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.n, self.outer, self.words.tobytes()))

    def __len__(self):
        return self.n

    def __repr__(self):
        bits = "".join("1" if b else "0" for b in self.to_bools())
        return f"BitChain({'Ω+' if self.outer else ''}{bits})"


def _nwords(n):
    return (n + 63) // 64


@dataclass
class BoolMatrix:
    """Cells x (1 + solids) membership table.

    Row 0 is the outer cell; column 0 is Ω; columns ``1..m`` follow
    ``names``.
    """

    bits: np.ndarray
    names: list

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape[1] != len(self.names) + 1:
            raise DimensionError("BoolMatrix width does not match names")
        if not self.bits[0, 0] or self.bits[0, 1:].any() or self.bits[1:, 0].any():
            raise ValidationError("row 0 must be the outer cell, alone in column Ω")

    @property
    def natoms(self):
        return self.bits.shape[0] - 1

    def chain(self, name):
        j = self.names.index(name) + 1
        return BitChain.from_bools(self.bits[1:, j])

    def chains(self):
        return {n: self.chain(n) for n in self.names}

    def omega(self):
        return BitChain.zeros(self.natoms).__invert__() | BitChain(
            np.zeros(_nwords(self.natoms), np.uint64), self.natoms, True)


# ---------------------------------------------------------------------------
# set membership classification
# ---------------------------------------------------------------------------

class Solid:
    """Boundary faces of one input solid prepared for ray casting."""

    def __init__(self, table, box):
        self.table = table
        self.box = box

    @classmethod
    def from_soup(cls, soup, k):
        ids = [f for f in range(len(soup)) if soup.solid[f] == k]
        table = soup.face_table(ids)
        return cls(table, Box.of(np.vstack([soup.V[soup.fverts[f]] for f in ids])))


def _ray_exit(p, d, box):
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (box.min - p) / d
        t2 = (box.max - p) / d
    t = np.where(d > 0, t2, np.where(d < 0, t1, np.inf))
    return float(max(np.min(t), 0.0))


def smc_point_in_solid(p, solid, seed=0, attempts=8, tol=1e-10):
    """Ray-parity point membership.

    A fixed seeded direction is cast first; when it grazes an edge or the
    point sits on a face plane, the direction is jittered and re-cast.

    Raises
    ------
    ClassificationError
        If all ``attempts`` casts are degenerate.
    """
    p = np.asarray(p, dtype=float)
    box = solid.box.expanded(1e-9 * max(solid.box.diagonal, 1.0))
    if np.any(p < box.min) or np.any(p > box.max):
        return False
    rng = np.random.default_rng(seed)
    base = rng.normal(size=3)
    for k in range(attempts):
        d = base + (0.25 * k) * rng.normal(size=3) if k else base
        d = d / np.linalg.norm(d)
        end = p + _ray_exit(p, d, box) * d
        faces = solid.table.index.query(Box.of([p, end]))
        c = _kernels.ray_crossings(p, d, faces, solid.table, tol)
        if c >= 0:
            return bool(c % 2)
    raise ClassificationError(f"point {p.tolist()} could not be classified")


def classify_atoms(arr, names=None, seed=0, threads=1):
    """Membership of every atom's witness point in every input solid.

    Parameters
    ----------
    arr : Arrangement3D
    names : list of str, optional
        Solid names, default ``X1..Xm``.

    Returns
    -------
    BoolMatrix
    """
    soup = arr.soup
    m = int(soup.solid.max()) + 1 if len(soup) else 0
    names = list(names) if names is not None else [f"X{k + 1}" for k in range(m)]
    if len(names) != m:
        raise DimensionError(f"{len(names)} names for {m} solids")
    solids = [Solid.from_soup(soup, k) for k in range(m)]

    def row(atom):
        try:
            return [smc_point_in_solid(atom.witness, s, seed) for s in solids]
        except ClassificationError as e:
            raise ClassificationError(f"atom {atom.index}: {e}") from e

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(row, arr.atoms))
    else:
        rows = [row(a) for a in arr.atoms]
    bits = np.zeros((len(arr.atoms) + 1, m + 1), dtype=bool)
    bits[0, 0] = True
    if rows:
        bits[1:, 1:] = np.array(rows, dtype=bool).reshape(len(rows), m)
    return BoolMatrix(bits, names)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_bitwise(expr, columns):
    """Evaluate a CSG expression over named bit chains."""
    if isinstance(expr, Leaf):
        if expr.name not in columns:
            raise ValidationError(
                f"unbound name {expr.name!r}; bound names: {', '.join(sorted(columns))}")
        return columns[expr.name]
    if isinstance(expr, Complement):
        return ~eval_bitwise(expr.arg, columns)
    vals = [eval_bitwise(a, columns) for a in expr.args]
    acc = vals[0]
    if isinstance(expr, Union):
        for v in vals[1:]:
            acc = acc | v
    elif isinstance(expr, Intersect):
        for v in vals[1:]:
            acc = acc & v
    elif isinstance(expr, Diff):
        for v in vals[1:]:
            acc = acc - v
    else:
        raise ValidationError(f"unknown expression node {expr!r}")
    return acc


def boundary_chain(result, d3):
    """Signed face chain ``d3 @ result``."""
    if result.outer:
        raise UnboundedResultError("result contains the unbounded cell; it has no finite boundary")
    if len(result) != d3.ncols:
        raise DimensionError(f"chain of length {len(result)} for {d3.ncols} atoms")
    return d3 @ result.to_bools().astype(np.int64)


def _require_cycle(chain, d2):
    chain = np.asarray(chain, dtype=np.int64)
    if len(chain) != d2.ncols:
        raise DimensionError(f"face chain of length {len(chain)} for {d2.ncols} faces")
    res = d2 @ chain
    bad = np.nonzero(res)[0]
    if len(bad):
        raise ValidationError(f"face chain is not a cycle: edge {int(bad[0])} has residual {int(res[bad[0]])}")
    return chain


def boundary_counts(chain, arr):
    """``(chi0, chi1, chi2)`` of a closed face chain.

    ``chi2`` counts faces, ``chi1`` the positive edge instances of the
    face-signed boundary matrix, ``chi0`` the vertices of those edges.
    """
    chain = _require_cycle(chain, arr.d2)
    faces = np.nonzero(chain)[0]
    m = arr.d2.tocsc()[:, faces].multiply(chain[faces][None, :]).tocoo()
    pos = m.data > 0
    edges = m.row[pos]
    verts = np.unique(arr.EV[edges])
    return int(len(verts)), int(len(edges)), int(len(faces))


@dataclass
class Mesh:
    """Triangle mesh with per-face loop structure."""

    V: np.ndarray
    T: np.ndarray
    loops: list

    def volume(self):
        a, b, c = self.V[self.T[:, 0]], self.V[self.T[:, 1]], self.V[self.T[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def _face_loops(col, s, EV):
    """Chain the oriented edges of one face into closed vertex loops."""
    nxt = {}
    for e, c in col.items():
        a, b = EV[e]
        if c * s < 0:
            a, b = b, a
        nxt.setdefault(int(a), []).append(int(b))
    loops = []
    for start in sorted(nxt):
        while nxt.get(start):
            loop = [start]
            v = nxt[start].pop()
            while v != start:
                loop.append(v)
                if not nxt.get(v):
                    raise ValidationError("face boundary does not close")
                v = nxt[v].pop()
            loops.append(loop)
    return loops


def brep_extract(chain, arr):
    """Oriented loops and triangulation of a closed face chain.

    Returns
    -------
    Mesh
        Vertices are the used complex vertices in index order; triangles
        wind counter-clockwise seen from outside the solid.
    """
    chain = _require_cycle(chain, arr.d2)
    faces = np.nonzero(chain)[0]
    tris = []
    loops_out = []
    for f in faces:
        s = int(chain[f])
        col = arr.d2.column(int(f))
        loops = _face_loops(col, s, arr.EV)
        n = s * arr.normals[f]
        fr = plane_frame(arr.V[loops[0]])
        if fr.normal @ n < 0:
            fr = fr.flipped()
        loc = [fr.to_local(arr.V[lp])[:, :2] for lp in loops]
        areas = [signed_area(l) for l in loc]
        outer = [k for k, a in enumerate(areas) if a > 0]
        holes = [k for k, a in enumerate(areas) if a <= 0]
        if len(outer) != 1:
            raise ValidationError(f"face {int(f)} has {len(outer)} outer loops")
        o = outer[0]
        order = [o] + holes
        flat = [v for k in order for v in loops[k]]
        for a, b, c in triangulate_face(loc[o], [loc[k] for k in holes]):
            tris.append((flat[a], flat[b], flat[c]))
        loops_out.append((int(f), [loops[k] for k in order]))
    used = np.unique(np.array(tris, dtype=np.int64).ravel()) if tris else np.zeros(0, np.int64)
    remap = -np.ones(len(arr.V), dtype=np.int64)
    remap[used] = np.arange(len(used))
    T = remap[np.array(tris, dtype=np.int64).reshape(-1, 3)]
    loops_out = [(f, [[int(remap[v]) for v in lp] for lp in ls]) for f, ls in loops_out]
    return Mesh(arr.V[used], T, loops_out)
