"""Assembly trees: placing primitive solids by depth-first affine traversal.

File syntax (s-expressions, ``;`` starts a comment)::

    (struct
      (solid A (cube))
      (t .3 .4 .25) (r pi/5 0 0) (r 0 0 pi/12)
      (solid B (cube))
      (group (t 2 0 0) (cylinder 16 1 2 1)))

``struct`` and ``group`` are synonyms.  Inside a group an affine node
``t``/``r``/``s`` post-multiplies the current transform for its later
siblings only; a nested group starts from its parent's transform and its
own affine nodes do not leak out.  Numbers may be arithmetic expressions
over ``pi``.
"""

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import primitives
from .chain import LarModel
from .errors import ChainIOError, ParseError, ValidationError
from .geometry import AffineMap, rotate, scale, translate


@dataclass
class Model:
    model: LarModel
    name: str = None


@dataclass
class Affine:
    map: AffineMap


@dataclass
class Group:
    children: list = field(default_factory=list)


def evaluate_assembly(node, dim=None):
    """Flatten an assembly tree into placed, named models.

    Returns
    -------
    list of (str, LarModel)
        Unnamed models are called ``X1, X2, ...`` by their DFS position.
    """
    out = []

    def visit(n, M):
        if isinstance(n, Model):
            d = n.model.dim
            A = M.get(d)
            out.append((n.name, n.model if A is None else n.model.transformed(A)))
            return M
        if isinstance(n, Affine):
            if not n.map.is_invertible():
                raise ValidationError(f"singular affine map {n.map}")
            d = n.map.dim
            M = dict(M)
            M[d] = n.map if d not in M else M[d] @ n.map
            return M
        if isinstance(n, Group):
            cur = M
            for c in n.children:
                cur = visit(c, cur)
            return M
        raise ValidationError(f"unknown assembly node {n!r}")

    visit(node, {})
    names = []
    for k, (name, m) in enumerate(out):
        name = name or f"X{k + 1}"
        if name in names:
            raise ValidationError(f"duplicate solid name {name!r}")
        names.append(name)
    placed = [(nm, m) for nm, (_, m) in zip(names, out)]
    if dim is not None:
        for nm, m in placed:
            if m.dim != dim:
                raise ValidationError(f"solid {nm} is {m.dim}D, expected {dim}D")
    return placed


# ---------------------------------------------------------------------------
# file syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(rb'\s+|;[^\n]*|\(|\)|"(?:[^"\\]|\\.)*"|[^\s()";]+')

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def eval_number(text):
    """Evaluate an arithmetic literal such as ``-pi/12`` or ``2*.3``."""
    def ev(n):
        if isinstance(n, ast.Expression):
            return ev(n.body)
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            return float(n.value)
        if isinstance(n, ast.Name) and n.id in ("pi", "π"):
            return math.pi
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
            return _BINOPS[type(n.op)](ev(n.left), ev(n.right))
        raise ValueError(text)
    try:
        return ev(ast.parse(text.replace("π", "pi"), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ValidationError(f"not a number: {text!r}") from None


def _read_sexpr(data):
    stack = [[]]
    opens = []
    for m in _TOKEN.finditer(data):
        tok = m.group()
        if tok[:1].isspace() or tok.startswith(b";"):
            continue
        if tok == b"(":
            stack.append([])
            opens.append(m.start())
        elif tok == b")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", m.start())
            lst = stack.pop()
            opens.pop()
            stack[-1].append((lst, m.start()))
        else:
            stack[-1].append((tok.decode("utf-8"), m.start()))
    if len(stack) > 1:
        raise ParseError("unbalanced '('", opens[-1])
    pos = sum(len(m.group()) for m in _TOKEN.finditer(data))
    if pos != len(data):
        raise ParseError("unreadable input", pos)
    return stack[0]


def _nums(args, at, n=None, lo=None, hi=None):
    vals = []
    for a, off in args:
        if isinstance(a, list):
            raise ParseError("expected a number", off)
        vals.append(eval_number(a))
    if n is not None and len(vals) != n or lo is not None and len(vals) < lo \
            or hi is not None and len(vals) > hi:
        raise ParseError(f"wrong number of arguments ({len(vals)})", at)
    return vals


def _build(item, base):
    node, off = item
    if not isinstance(node, list):
        raise ParseError(f"expected a form, got {node!r}", off)
    if not node:
        raise ParseError("empty form", off)
    head, hoff = node[0]
    args = node[1:]
    if isinstance(head, list):
        raise ParseError("form head must be a keyword", hoff)
    if head in ("struct", "group"):
        return Group([_build(a, base) for a in args])
    if head == "solid":
        if len(args) != 2 or isinstance(args[0][0], list):
            raise ParseError("usage: (solid NAME model)", off)
        name = args[0][0]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
            raise ParseError(f"invalid solid name {name!r}", args[0][1])
        inner = _build(args[1], base)
        if isinstance(inner, Model):
            return Model(inner.model, name)
        models = evaluate_assembly(inner)
        if not models:
            raise ParseError("solid has no geometry", off)
        return Model(_merge([m for _, m in models]), name)
    if head == "t":
        return Affine(translate(*_nums(args, off, lo=2, hi=3)))
    if head == "s":
        return Affine(scale(*_nums(args, off, lo=2, hi=3)))
    if head == "r":
        v = _nums(args, off)
        if len(v) not in (1, 3):
            raise ParseError("r takes 1 (2D) or 3 (3D) angles", off)
        return Affine(rotate(*v))
    if head == "cube":
        _nums(args, off, n=0)
        return Model(primitives.cube())
    if head in ("cuboid", "cuboid_grid"):
        v = _nums(args, off, lo=2, hi=3)
        return Model(primitives.cuboid_grid(tuple(int(x) for x in v)))
    if head == "box":
        v = _nums(args, off, lo=3, hi=6)
        size, origin = v[:3], (v[3:] + [0.0, 0.0, 0.0])[:3]
        return Model(primitives.cuboid(size, origin))
    if head == "cylinder":
        return Model(primitives.cylinder(*_nums(args, off, hi=4)))
    if head == "sphere":
        return Model(primitives.sphere(*_nums(args, off, hi=3)))
    if head == "rect":
        return Model(primitives.rect(*_nums(args, off, n=4)))
    if head == "polygon":
        v = _nums(args, off, lo=6)
        if len(v) % 2:
            raise ParseError("polygon needs x y pairs", off)
        return Model(primitives.polygon(np.reshape(v, (-1, 2))))
    if head == "lar":
        if len(args) != 1 or isinstance(args[0][0], list) or not args[0][0].startswith('"'):
            raise ParseError('usage: (lar "file")', off)
        from .io import read_lar
        p = Path(args[0][0][1:-1])
        return Model(read_lar(p if p.is_absolute() else base / p))
    raise ParseError(f"unknown form {head!r}", hoff)


def _merge(models):
    V, EV, FV, off = [], [], [], 0
    for m in models:
        V.append(m.V)
        EV += [(a + off, b + off) for a, b in m.EV]
        if m.FV is not None:
            FV += [[v + off for v in f] for f in m.FV]
        off += len(m.V)
    return LarModel(np.vstack(V), EV, FV or None)


def parse_assembly(text, base="."):
    """Parse assembly text into a :class:`Group`."""
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    items = _read_sexpr(data)
    if not items:
        raise ParseError("empty assembly", 0)
    return Group([_build(it, Path(base)) for it in items])


def read_assembly(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ChainIOError(f"cannot read {path}: {e}") from e
    return parse_assembly(text, path.parent)
