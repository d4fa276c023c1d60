"""Sparse signed integer matrices and chain arithmetic.

All (co)boundary operators in the package are :class:`SparseSignedMatrix`
instances.  Storage is compressed sparse column (scipy) with 8-bit signed
values; intermediate products that do not fit in 8 bits are widened to
32 bits instead of silently wrapping.

Conventions
-----------
* indices are 0-based; text formats print them 1-based.
* ``d1`` has shape ``(n_vertices, n_edges)``; the column of edge ``(a, b)``
  holds ``-1`` at ``a`` and ``+1`` at ``b``.
* coboundaries are transposes: ``delta_{p-1} = d_p.T``.
* vertex coordinates are stored one point per row, shape ``(n, d)``.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ValidationError

_I8 = np.iinfo(np.int8)


def _narrow(data):
    data = np.asarray(data)
    if data.size == 0 or (data.min() >= _I8.min and data.max() <= _I8.max):
        return data.astype(np.int8)
    return data.astype(np.int32)


class SparseSignedMatrix:
    """Immutable sparse matrix with small signed integer entries.

    The semantic contract is the triplet view returned by :meth:`triplets`:
    no duplicate ``(row, col)`` pairs and no stored zeros.
    """

    __slots__ = ("_m",)

    def __init__(self, rows, cols, vals, shape):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.int64).ravel()
        nrows, ncols = int(shape[0]), int(shape[1])
        if not (len(rows) == len(cols) == len(vals)):
            raise DimensionError("triplet arrays have different lengths")
        if len(rows) and (rows.min() < 0 or cols.min() < 0
                          or rows.max() >= nrows or cols.max() >= ncols):
            raise DimensionError(f"triplet index outside shape {nrows}x{ncols}")
        m = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsc()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        m.data = _narrow(m.data)
        self._m = m

    @classmethod
    def from_scipy(cls, m):
        m = sp.coo_matrix(m)
        return cls(m.row, m.col, np.rint(m.data).astype(np.int64), m.shape)

    @classmethod
    def from_dense(cls, a):
        a = np.atleast_2d(np.asarray(a))
        r, c = np.nonzero(a)
        return cls(r, c, a[r, c].astype(np.int64), a.shape)

    @classmethod
    def zeros(cls, shape):
        return cls([], [], [], shape)

    @classmethod
    def from_columns(cls, columns, nrows):
        """Build from a list of ``{row: value}`` dicts, one per column."""
        r, c, v = [], [], []
        for j, col in enumerate(columns):
            for i, x in col.items():
                r.append(i)
                c.append(j)
                v.append(x)
        return cls(r, c, v, (nrows, len(columns)))

    @property
    def shape(self):
        return self._m.shape

    @property
    def nrows(self):
        return self._m.shape[0]

    @property
    def ncols(self):
        return self._m.shape[1]

    @property
    def nnz(self):
        return self._m.nnz

    @property
    def dtype(self):
        return self._m.dtype

    def tocsc(self):
        return self._m.copy()

    def toarray(self):
        return self._m.toarray()

    def triplets(self):
        """Return ``(rows, cols, vals)`` sorted column-major."""
        m = self._m.tocoo()
        order = np.lexsort((m.row, m.col))
        return (m.row[order].astype(np.int64), m.col[order].astype(np.int64),
                m.data[order].astype(np.int64))

    def column(self, j):
        """Entries of column ``j`` as a ``{row: value}`` dict."""
        lo, hi = self._m.indptr[j], self._m.indptr[j + 1]
        return {int(i): int(x) for i, x in zip(self._m.indices[lo:hi], self._m.data[lo:hi])}

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    @property
    def T(self):
        return SparseSignedMatrix.from_scipy(self._m.T)

    def select_columns(self, cols):
        return SparseSignedMatrix.from_scipy(self._m[:, list(cols)])

    def hstack(self, other):
        if other.nrows != self.nrows:
            raise DimensionError("hstack row mismatch")
        return SparseSignedMatrix.from_scipy(sp.hstack([self._m, other._m]))

    def __matmul__(self, other):
        if isinstance(other, SparseSignedMatrix):
            if self.ncols != other.nrows:
                raise DimensionError(
                    f"cannot multiply {self.shape} by {other.shape}")
            a = self._m.astype(np.int64)
            b = other._m.astype(np.int64)
            return SparseSignedMatrix.from_scipy(a @ b)
        vec = np.asarray(other)
        if vec.ndim != 1 or vec.shape[0] != self.ncols:
            raise DimensionError(
                f"vector of length {vec.shape} does not match {self.ncols} columns")
        return np.asarray(self._m.astype(np.int64) @ vec.astype(np.int64)).ravel()

    def __eq__(self, other):
        if not isinstance(other, SparseSignedMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.triplets(), other.triplets()))

    def __hash__(self):
        return hash((self.shape, *(t.tobytes() for t in self.triplets())))

    def __repr__(self):
        return f"SparseSignedMatrix(shape={self.shape}, nnz={self.nnz})"


def characteristic_matrix(cells, ncols=None):
    """Binary cells-by-vertices matrix; row ``k`` marks the vertices of cell ``k``."""
    cells = [list(c) for c in cells]
    if not cells:
        return SparseSignedMatrix.zeros((0, ncols or 0))
    rows, cols = [], []
    for k, cell in enumerate(cells):
        if len(cell) == 0:
            raise ValidationError(f"cell {k} is empty")
        if len(set(cell)) != len(cell):
            raise ValidationError(f"cell {k} repeats a vertex: {cell}")
        if min(cell) < 0:
            raise ValidationError(f"cell {k} has a negative index")
        rows.extend([k] * len(cell))
        cols.extend(cell)
    n = max(cols) + 1
    if ncols is not None:
        if ncols < n:
            raise DimensionError(f"index {n - 1} exceeds {ncols} columns")
        n = ncols
    return SparseSignedMatrix(rows, cols, np.ones(len(rows)), (len(cells), n))


def boundary1(EV, nverts=None):
    """Signed ``d1`` (vertices x edges) with edge ``(a, b)`` oriented a -> b."""
    EV = np.asarray(EV, dtype=np.int64).reshape(-1, 2)
    n = int(EV.max()) + 1 if len(EV) else 0
    nverts = n if nverts is None else nverts
    if nverts < n:
        raise DimensionError("edge index exceeds vertex count")
    if len(EV) and np.any(EV[:, 0] == EV[:, 1]):
        raise ValidationError("edge with identical endpoints")
    k = np.arange(len(EV))
    rows = np.concatenate([EV[:, 0], EV[:, 1]])
    cols = np.concatenate([k, k])
    vals = np.concatenate([-np.ones(len(EV)), np.ones(len(EV))])
    return SparseSignedMatrix(rows, cols, vals, (nverts, len(EV)))


def unsigned_boundary2(K1, K2):
    """Binary edges-by-faces incidence from two characteristic matrices.

    ``K1 @ K2.T`` counts the vertices shared by each edge and face; an edge
    lies on a face when all of its vertices are shared.
    """
    if K1.ncols != K2.ncols:
        raise DimensionError(
            f"vertex column spaces differ: {K1.ncols} vs {K2.ncols}")
    counts = (K1.tocsc().astype(np.int64) @ K2.tocsc().T.astype(np.int64)).tocoo()
    sizes = np.asarray(K1.tocsc().sum(axis=1)).ravel()
    keep = counts.data == sizes[counts.row]
    return SparseSignedMatrix(counts.row[keep], counts.col[keep],
                              np.ones(int(keep.sum())), counts.shape)


def apply_boundary(d, chain):
    """Integer matrix-vector product ``d @ chain``."""
    return d @ np.asarray(chain)


def check_exactness(dp, dp1):
    """Check ``dp @ dp1 == 0``.

    Returns ``(True, None)`` or ``(False, (row, col, value))`` where the
    witness is the first non-zero of the product in column-major order.
    """
    if dp.ncols != dp1.nrows:
        raise DimensionError(f"cannot compose {dp.shape} with {dp1.shape}")
    prod = dp @ dp1
    if prod.nnz == 0:
        return True, None
    r, c, v = prod.triplets()
    return False, (int(r[0]), int(c[0]), int(v[0]))


def euler_characteristic(counts):
    return int(sum((-1) ** p * int(n) for p, n in enumerate(counts)))


@dataclass(frozen=True)
class LarModel:
    """Vertex embedding plus cells-by-vertices lists.

    ``V`` has one point per row.  ``FV`` lists may be ordered cyclically
    (primitives do so) but only membership is relied upon.
    """

    V: np.ndarray
    EV: tuple
    FV: Optional[tuple] = None

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        if V.ndim != 2 or V.shape[1] not in (2, 3):
            raise ValidationError(f"V must have shape (n, 2) or (n, 3), got {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        EV = tuple(tuple(int(i) for i in e) for e in self.EV)
        n = len(V)
        for k, e in enumerate(EV):
            if len(e) != 2 or e[0] == e[1]:
                raise ValidationError(f"edge {k} must have 2 distinct vertices: {e}")
            if max(e) >= n or min(e) < 0:
                raise ValidationError(f"edge {k} index out of range: {e}")
        object.__setattr__(self, "EV", EV)
        if self.FV is not None:
            FV = tuple(tuple(int(i) for i in f) for f in self.FV)
            for k, f in enumerate(FV):
                if len(set(f)) != len(f) or len(f) < 3:
                    raise ValidationError(f"face {k} needs >= 3 distinct vertices: {f}")
                if max(f) >= n or min(f) < 0:
                    raise ValidationError(f"face {k} index out of range: {f}")
            object.__setattr__(self, "FV", FV)

    @property
    def dim(self):
        return self.V.shape[1]

    def transformed(self, affine):
        return LarModel(affine.apply(self.V), self.EV, self.FV)

    def face_edges(self):
        """Edge indices bounding each face (``EF`` columns)."""
        if self.FV is None:
            raise ValidationError("model has no faces")
        n = len(self.V)
        EF = unsigned_boundary2(characteristic_matrix(self.EV, n),
                                characteristic_matrix(self.FV, n))
        return [sorted(col) for col in EF.columns()]


@dataclass
class ChainComplex:
    """Coordinates plus boundary operators ``d1`` (and ``d2``, ``d3``)."""

    V: np.ndarray
    d1: SparseSignedMatrix
    d2: Optional[SparseSignedMatrix] = None
    d3: Optional[SparseSignedMatrix] = None
    meta: dict = field(default_factory=dict)

    def operators(self):
        return [d for d in (self.d1, self.d2, self.d3) if d is not None]

    def counts(self):
        """Cell counts per dimension (bounded cells only for the top one)."""
        ops = self.operators()
        return [len(self.V)] + [d.ncols for d in ops]

    def validate(self):
        ops = self.operators()
        if ops[0].nrows != len(self.V):
            raise DimensionError("d1 rows do not match vertex count")
        for a, b in zip(ops, ops[1:]):
            ok, wit = check_exactness(a, b)
            if not ok:
                from .errors import ExactnessError
                raise ExactnessError(f"boundary of boundary is non-zero at {wit}")
        return True


def edges_from_d1(d1: SparseSignedMatrix) -> np.ndarray:
    """Recover the ``(tail, head)`` vertex pair of every column of ``d1``."""
    r, c, v = d1.triplets()
    EV = np.zeros((d1.ncols, 2), dtype=np.int64)
    EV[c[v < 0], 0] = r[v < 0]
    EV[c[v > 0], 1] = r[v > 0]
    return EV


def signed_chain_to_list(chain: Sequence[int]):
    """1-based signed indices of the non-zeros, as printed in logs."""
    return [int(np.sign(x)) * (i + 1) for i, x in enumerate(chain) if x != 0]
