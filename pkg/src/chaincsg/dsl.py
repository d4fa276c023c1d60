"""Prefix CSG expression language.

Grammar::

    expr := name | '(' op expr+ ')'
    op   := '+' | '*' | '-' | '!'

Commas between arguments are optional.  ``+`` (union) and ``*``
(intersection) take at least two arguments, ``-`` is difference with two or
more arguments and complement with one, ``!`` is complement.

A program may precede the expression with ``let NAME = expr`` lines; the
bindings are substituted into the final expression.

Parse errors carry a UTF-8 byte offset: the offending character for
lexical errors, the ``(`` of an unclosed form, and the operator of a form
with the wrong number of arguments.
"""

import re
from dataclasses import dataclass

from .errors import ParseError


@dataclass(frozen=True)
class Leaf:
    name: str


@dataclass(frozen=True)
class Union:
    args: tuple


@dataclass(frozen=True)
class Intersect:
    args: tuple


@dataclass(frozen=True)
class Diff:
    args: tuple


@dataclass(frozen=True)
class Complement:
    arg: object


_OPS = {ord("+"): Union, ord("*"): Intersect, ord("-"): Diff, ord("!"): Complement}
_SYMBOL = {Union: "+", Intersect: "*", Diff: "-"}
_NAME = re.compile(rb"[A-Za-z_][A-Za-z0-9_]*")
_SPACE = b" \t\r\n,"


class _Parser:
    def __init__(self, data, base=0):
        self.s = data
        self.i = 0
        self.base = base

    def error(self, msg, at=None):
        raise ParseError(msg, self.base + (self.i if at is None else at))

    def skip(self):
        while self.i < len(self.s) and self.s[self.i] in _SPACE:
            self.i += 1

    def expr(self):
        self.skip()
        if self.i >= len(self.s):
            self.error("unexpected end of expression")
        c = self.s[self.i]
        if c == ord("("):
            return self.form()
        m = _NAME.match(self.s, self.i)
        if m:
            self.i = m.end()
            return Leaf(m.group().decode())
        if c == ord(")"):
            self.error("unbalanced ')'")
        self.error(f"unexpected character {self._char()!r}")

    def _char(self):
        for n in range(1, 5):
            try:
                return self.s[self.i:self.i + n].decode()
            except UnicodeDecodeError:
                continue
        return repr(self.s[self.i:self.i + 1])

    def form(self):
        start = self.i
        self.i += 1
        self.skip()
        if self.i >= len(self.s):
            self.error("unbalanced '('", start)
        op = _OPS.get(self.s[self.i])
        if op is None:
            self.error(f"unknown operator {self._char()!r}")
        op_at = self.i
        self.i += 1
        args = []
        while True:
            self.skip()
            if self.i >= len(self.s):
                self.error("unbalanced '('", start)
            if self.s[self.i] == ord(")"):
                self.i += 1
                break
            args.append(self.expr())
        sym = chr(self.s[op_at])
        if op is Complement:
            if len(args) != 1:
                self.error(f"'!' takes exactly one argument, got {len(args)}", op_at)
            return Complement(args[0])
        if op is Diff and len(args) == 1:
            return Complement(args[0])
        if len(args) < 2:
            self.error(f"'{sym}' needs at least two arguments, got {len(args)}", op_at)
        return op(tuple(args))


def parse_csg(text):
    """Parse one expression.

    Raises
    ------
    ParseError
        With the UTF-8 byte offset of the offending character.
    """
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    p = _Parser(data)
    e = p.expr()
    p.skip()
    if p.i != len(data):
        p.error("trailing input after expression")
    return e


_LET = re.compile(rb"\s*let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*")


def parse_program(text):
    """Parse ``let`` bindings followed by one expression; returns the substituted AST."""
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    env = {}
    pos = 0
    body = None
    for line in data.splitlines(keepends=True):
        stripped = line.strip()
        if not stripped or stripped.startswith(b"#"):
            pos += len(line)
            continue
        m = _LET.match(line)
        if m and body is None:
            p = _Parser(line[m.end():], pos + m.end())
            e = p.expr()
            p.skip()
            if p.i != len(p.s):
                p.error("trailing input after binding")
            env[m.group(1).decode()] = substitute(e, env)
        elif body is None:
            body = pos
        pos += len(line)
    if body is None:
        raise ParseError("empty expression", len(data))
    p = _Parser(data[body:], body)
    e = p.expr()
    p.skip()
    if p.i != len(p.s):
        p.error("trailing input after expression")
    return substitute(e, env)


def substitute(expr, env):
    if isinstance(expr, Leaf):
        return env.get(expr.name, expr)
    if isinstance(expr, Complement):
        return Complement(substitute(expr.arg, env))
    return type(expr)(tuple(substitute(a, env) for a in expr.args))


def to_string(expr):
    """Canonical text form; ``parse_csg(to_string(e)) == e``."""
    if isinstance(expr, Leaf):
        return expr.name
    if isinstance(expr, Complement):
        return f"(! {to_string(expr.arg)})"
    return "(" + _SYMBOL[type(expr)] + " " + " ".join(to_string(a) for a in expr.args) + ")"


def leaves(expr):
    """Leaf names in first-occurrence order."""
    out = []

    def walk(e):
        if isinstance(e, Leaf):
            if e.name not in out:
                out.append(e.name)
        elif isinstance(e, Complement):
            walk(e.arg)
        else:
            for a in e.args:
                walk(a)

    walk(expr)
    return out
