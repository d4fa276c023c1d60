"""Text formats: LAR models, complex containers, OBJ meshes and an SVG subset.

All integer indices in files are 1-based.

LAR model::

    LAR <dim> <nverts>
    <x> <y> [<z>]            (one line per vertex)
    EV <nedges>
    <a> <b>
    FV <nfaces>              (optional)
    <v1> <v2> ...

Complex container::

    COMPLEX <dim> <nverts>
    <coordinates>
    MATRIX <name> <nrows> <ncols> <nnz>
    <row> <col> <value>      (column-major)
    NORMALS <nfaces>         (3D only)
    OUTER <k>                (signed 1-based faces of the unbounded cell)
    NAMES <m> <name> ...
    BOOLMATRIX <rows> <cols>
    <0/1 row>
"""

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import LarModel, SparseSignedMatrix, edges_from_d1
from .errors import ChainIOError, ValidationError


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise ChainIOError(f"cannot write {path}: {e}") from e


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ChainIOError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ChainIOError(f"{path} is not UTF-8 text") from e


def _fmt(x):
    return repr(float(x))


class _Lines:
    def __init__(self, text, path):
        self.lines = [ln.split() for ln in text.splitlines()]
        self.lines = [ln for ln in self.lines if ln and not ln[0].startswith("#")]
        self.i = 0
        self.path = path

    def fail(self, msg):
        raise ChainIOError(f"{self.path}: {msg} (record {self.i})")

    def peek(self):
        return self.lines[self.i] if self.i < len(self.lines) else None

    def next(self):
        if self.i >= len(self.lines):
            self.fail("unexpected end of file")
        ln = self.lines[self.i]
        self.i += 1
        return ln

    def header(self, key, n):
        ln = self.next()
        if ln[0] != key or len(ln) != n + 1:
            self.fail(f"expected '{key}' header")
        return ln[1:]

    def ints(self, ln):
        try:
            return [int(x) for x in ln]
        except ValueError:
            self.fail("expected integers")

    def floats(self, ln, n):
        if len(ln) != n:
            self.fail(f"expected {n} numbers")
        try:
            return [float(x) for x in ln]
        except ValueError:
            self.fail("expected numbers")


# ---------------------------------------------------------------------------
# LAR models
# ---------------------------------------------------------------------------

def format_lar(model):
    d = model.dim
    out = [f"LAR {d} {len(model.V)}"]
    out += [" ".join(_fmt(x) for x in p) for p in model.V]
    out.append(f"EV {len(model.EV)}")
    out += [f"{a + 1} {b + 1}" for a, b in model.EV]
    if model.FV is not None:
        out.append(f"FV {len(model.FV)}")
        out += [" ".join(str(v + 1) for v in f) for f in model.FV]
    return "\n".join(out) + "\n"


def parse_lar(text, path="<string>"):
    L = _Lines(text, path)
    d, n = L.ints(L.header("LAR", 2))
    if d not in (2, 3) or n < 0:
        L.fail("bad LAR header")
    V = np.array([L.floats(L.next(), d) for _ in range(n)]).reshape(n, d)
    (m,) = L.ints(L.header("EV", 1))
    EV = []
    for _ in range(m):
        e = L.ints(L.next())
        if len(e) != 2:
            L.fail("edge needs 2 indices")
        EV.append((e[0] - 1, e[1] - 1))
    FV = None
    if L.peek() is not None:
        (k,) = L.ints(L.header("FV", 1))
        FV = [[v - 1 for v in L.ints(L.next())] for _ in range(k)]
    if L.peek() is not None:
        L.fail("trailing data")
    try:
        return LarModel(V, EV, FV)
    except ValidationError as e:
        raise ChainIOError(f"{path}: {e}") from e


def write_lar(model, path):
    _write(path, format_lar(model))


def read_lar(path):
    return parse_lar(_read(path), path)


# ---------------------------------------------------------------------------
# complex container
# ---------------------------------------------------------------------------

@dataclass
class ComplexFile:
    """Contents of a complex container.

    Exposes the attributes used by :func:`~chaincsg.boolean.boundary_counts`
    and :func:`~chaincsg.boolean.brep_extract`.
    """

    V: np.ndarray
    d1: SparseSignedMatrix
    d2: SparseSignedMatrix
    d3: SparseSignedMatrix = None
    normals: np.ndarray = None
    outer: dict = field(default_factory=dict)
    names: list = field(default_factory=list)
    boolmatrix: np.ndarray = None

    @property
    def dim(self):
        return self.V.shape[1]

    @property
    def EV(self):
        return edges_from_d1(self.d1)


def _format_matrix(name, m):
    r, c, v = m.triplets()
    out = [f"MATRIX {name} {m.nrows} {m.ncols} {len(v)}"]
    out += [f"{a + 1} {b + 1} {x}" for a, b, x in zip(r, c, v)]
    return out


def format_complex(cf):
    out = [f"COMPLEX {cf.dim} {len(cf.V)}"]
    out += [" ".join(_fmt(x) for x in p) for p in cf.V]
    for name in ("d1", "d2", "d3"):
        m = getattr(cf, name)
        if m is not None:
            out += _format_matrix(name, m)
    if cf.normals is not None:
        out.append(f"NORMALS {len(cf.normals)}")
        out += [" ".join(_fmt(x) for x in n) for n in cf.normals]
    if cf.outer:
        out.append(f"OUTER {len(cf.outer)}")
        out.append(" ".join(str(s * (f + 1)) for f, s in sorted(cf.outer.items())))
    if cf.names:
        out.append(f"NAMES {len(cf.names)} " + " ".join(cf.names))
    if cf.boolmatrix is not None:
        b = np.asarray(cf.boolmatrix, dtype=np.int8)
        out.append(f"BOOLMATRIX {b.shape[0]} {b.shape[1]}")
        out += [" ".join(str(x) for x in row) for row in b]
    return "\n".join(out) + "\n"


def parse_complex(text, path="<string>"):
    L = _Lines(text, path)
    d, n = L.ints(L.header("COMPLEX", 2))
    V = np.array([L.floats(L.next(), d) for _ in range(n)]).reshape(n, d)
    mats, kw = {}, {}
    while L.peek() is not None:
        ln = L.next()
        key = ln[0]
        if key == "MATRIX":
            if len(ln) != 5:
                L.fail("bad MATRIX header")
            name = ln[1]
            nr, nc, nnz = L.ints(ln[2:])
            trip = np.array([L.ints(L.next()) for _ in range(nnz)], dtype=np.int64).reshape(-1, 3)
            try:
                mats[name] = SparseSignedMatrix(trip[:, 0] - 1, trip[:, 1] - 1, trip[:, 2], (nr, nc))
            except ValidationError as e:
                L.fail(str(e))
        elif key == "NORMALS":
            (k,) = L.ints(ln[1:])
            kw["normals"] = np.array([L.floats(L.next(), 3) for _ in range(k)]).reshape(k, 3)
        elif key == "OUTER":
            (k,) = L.ints(ln[1:])
            vals = L.ints(L.next()) if k else []
            kw["outer"] = {abs(x) - 1: (1 if x > 0 else -1) for x in vals}
        elif key == "NAMES":
            k = int(ln[1])
            if len(ln) != k + 2:
                L.fail("NAMES count mismatch")
            kw["names"] = ln[2:]
        elif key == "BOOLMATRIX":
            r, c = L.ints(ln[1:])
            kw["boolmatrix"] = np.array([L.ints(L.next()) for _ in range(r)], dtype=bool).reshape(r, c)
        else:
            L.fail(f"unknown section {key!r}")
    if "d1" not in mats or "d2" not in mats:
        L.fail("container needs d1 and d2")
    return ComplexFile(V, mats["d1"], mats["d2"], mats.get("d3"), **kw)


def write_complex(cf, path):
    _write(path, format_complex(cf))


def read_complex(path):
    return parse_complex(_read(path), path)


# ---------------------------------------------------------------------------
# OBJ
# ---------------------------------------------------------------------------

def format_obj(V, T):
    out = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in V]
    out += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in T]
    return "\n".join(out) + "\n"


def write_obj(mesh, path):
    _write(path, format_obj(mesh.V, mesh.T))


def parse_obj(text, path="<string>"):
    V, T = [], []
    for k, ln in enumerate(text.splitlines()):
        p = ln.split()
        if not p or p[0].startswith("#"):
            continue
        try:
            if p[0] == "v":
                V.append([float(x) for x in p[1:4]])
            elif p[0] == "f":
                idx = [int(x.split("/")[0]) for x in p[1:]]
                idx = [i - 1 if i > 0 else len(V) + i for i in idx]
                T += [(idx[0], idx[j], idx[j + 1]) for j in range(1, len(idx) - 1)]
        except ValueError:
            raise ChainIOError(f"{path}: malformed line {k + 1}") from None
    V = np.array(V, dtype=float).reshape(-1, 3)
    T = np.array(T, dtype=np.int64).reshape(-1, 3)
    if len(T) and (T.min() < 0 or T.max() >= len(V)):
        raise ChainIOError(f"{path}: face index out of range")
    return V, T


def read_obj(path):
    return parse_obj(_read(path), path)


# ---------------------------------------------------------------------------
# SVG subset
# ---------------------------------------------------------------------------

@dataclass
class Shape2D:
    """One SVG element: its polylines and whether they are closed."""

    name: str
    loops: list
    closed: bool

    def segments(self):
        out = []
        for P in self.loops:
            n = len(P)
            m = n if self.closed else n - 1
            out += [(P[i], P[(i + 1) % n]) for i in range(m)]
        return np.array(out, dtype=float).reshape(-1, 2, 2)


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_PATH_TOKEN = re.compile(rf"([MmLlHhVvZzCcQqSsTtAa])|({_NUM})")


def _floats(s):
    return [float(x) for x in re.findall(_NUM, s or "")]


def _flatten_path(d, steps=8):
    """Polylines of an SVG path; curves are flattened into ``steps`` chords."""
    toks = _PATH_TOKEN.findall(d)
    subpaths, cur, closed = [], [], []
    pos = np.zeros(2)
    start = np.zeros(2)
    i = 0
    cmd = None
    nums = []

    def take(k):
        nonlocal i
        if i + k > len(toks) or any(t[0] for t in toks[i:i + k]):
            raise ChainIOError(f"malformed path data near token {i}")
        v = [float(t[1]) for t in toks[i:i + k]]
        i += k
        return v

    def finish(close):
        nonlocal cur
        if len(cur) > 1:
            if close and np.allclose(cur[0], cur[-1]):
                cur = cur[:-1]
            subpaths.append(np.array(cur))
            closed.append(close)
        cur = []

    while i < len(toks):
        if toks[i][0]:
            cmd = toks[i][0]
            i += 1
        elif cmd is None:
            raise ChainIOError("path data must start with a command")
        rel = cmd.islower()
        c = cmd.upper()
        base = pos if rel else np.zeros(2)
        if c == "M":
            finish(False)
            pos = base + take(2)
            start = pos.copy()
            cur = [pos.copy()]
            cmd = "l" if rel else "L"
        elif c == "L":
            pos = base + take(2)
            cur.append(pos.copy())
        elif c == "H":
            (x,) = take(1)
            pos = np.array([pos[0] + x if rel else x, pos[1]])
            cur.append(pos.copy())
        elif c == "V":
            (y,) = take(1)
            pos = np.array([pos[0], pos[1] + y if rel else y])
            cur.append(pos.copy())
        elif c in "CQ":
            k = 6 if c == "C" else 4
            v = np.reshape(take(k), (-1, 2)) + base
            ctrl = np.vstack([pos, v])
            for s in range(1, steps + 1):
                t = s / steps
                cur.append(_bezier(ctrl, t))
            pos = ctrl[-1].copy()
        elif c == "Z":
            finish(True)
            pos = start.copy()
            cur = []
        else:
            raise ChainIOError(f"unsupported path command {cmd!r}")
    finish(False)
    return subpaths, closed


def _bezier(P, t):
    P = P.copy()
    while len(P) > 1:
        P = (1 - t) * P[:-1] + t * P[1:]
    return P[0]


def parse_svg(text, path="<string>"):
    """Shapes of the supported SVG elements in document order.

    Supported: ``rect``, ``polygon``, ``polyline``, ``line`` and ``path``
    (M/L/H/V/Z absolute and relative, C/Q flattened).  ``transform``
    attributes are not applied.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ChainIOError(f"{path}: malformed SVG: {e}") from e
    shapes = []
    for el in root.iter():
        tag = el.tag.rsplit("}", 1)[-1]
        name = el.get("id") or f"S{len(shapes) + 1}"
        try:
            if tag == "rect":
                x, y = float(el.get("x", 0)), float(el.get("y", 0))
                w, h = float(el.get("width")), float(el.get("height"))
                if w <= 0 or h <= 0:
                    raise ValueError
                P = np.array([[x, y], [x + w, y], [x + w, y + h], [x, y + h]])
                shapes.append(Shape2D(name, [P], True))
            elif tag in ("polygon", "polyline"):
                v = _floats(el.get("points"))
                if len(v) % 2 or len(v) < 4:
                    raise ValueError
                shapes.append(Shape2D(name, [np.reshape(v, (-1, 2))], tag == "polygon"))
            elif tag == "line":
                P = np.array([[float(el.get(k, 0)) for k in ("x1", "y1")],
                              [float(el.get(k, 0)) for k in ("x2", "y2")]])
                shapes.append(Shape2D(name, [P], False))
            elif tag == "path":
                subs, closed = _flatten_path(el.get("d", ""))
                if subs:
                    shapes.append(Shape2D(name, subs, all(closed)))
        except (TypeError, ValueError):
            raise ChainIOError(f"{path}: malformed <{tag}> element") from None
    return shapes


def read_svg(path):
    return parse_svg(_read(path), path)


def shapes_to_segments(shapes):
    """``(V, EV)`` soup of every shape's segments."""
    segs = [s.segments() for s in shapes]
    S = np.concatenate(segs) if segs else np.zeros((0, 2, 2))
    return S.reshape(-1, 2), np.arange(2 * len(S)).reshape(-1, 2)
