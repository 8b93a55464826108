"""Abstract syntax for muSPARK programs, paths and source spans.

All nodes are frozen dataclasses. Spans and statement ids are excluded from
equality, so two programs compare equal iff they are structurally identical.
"""
from __future__ import annotations

import dataclasses as dc
import enum
import itertools
from typing import Iterator, Optional, Union

DEREF = "all"


@dc.dataclass(frozen=True)
class Span:
    """Half-open source range, 1-based lines and columns."""

    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Span(0, 0, 0, 0)


def _span() -> Span:
    return dc.field(default=NOWHERE, compare=False, repr=False)


# --------------------------------------------------------------------
# Types

class ScalarKind(enum.Enum):
    INTEGER = "Integer"
    REAL = "Real"
    BOOLEAN = "Boolean"


@dc.dataclass(frozen=True)
class Scalar:
    kind: ScalarKind

    def __str__(self) -> str:
        return self.kind.value


@dc.dataclass(frozen=True)
class Access:
    element: "Type"

    def __str__(self) -> str:
        return f"access {self.element}"


@dc.dataclass(frozen=True)
class Named:
    name: str

    def __str__(self) -> str:
        return self.name


Type = Union[Scalar, Access, Named]

INTEGER = Scalar(ScalarKind.INTEGER)
REAL = Scalar(ScalarKind.REAL)
BOOLEAN = Scalar(ScalarKind.BOOLEAN)
SCALARS = {k.value: Scalar(k) for k in ScalarKind}


def deref_nesting(t: Type) -> int:
    """Number of directly nested ``access`` constructors."""
    n = 0
    while isinstance(t, Access):
        n += 1
        t = t.element
    return n


# --------------------------------------------------------------------
# Paths

@dc.dataclass(frozen=True)
class Path:
    """A variable followed by field selections and dereferences.

    Segments are field names, or ``DEREF`` for ``.all`` (``all`` is a
    reserved word, so it can never clash with a field name).
    """

    root: str
    segments: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Path":
        root, *segs = text.split(".")
        return cls(root, tuple(segs))

    def __str__(self) -> str:
        return ".".join((self.root, *self.segments))

    def __len__(self) -> int:
        return len(self.segments)

    def field(self, name: str) -> "Path":
        return Path(self.root, self.segments + (name,))

    def deref(self) -> "Path":
        return Path(self.root, self.segments + (DEREF,))

    def extend(self, segments: tuple[str, ...]) -> "Path":
        return Path(self.root, self.segments + tuple(segments))

    @property
    def is_variable(self) -> bool:
        return not self.segments

    @property
    def parent(self) -> "Path":
        assert self.segments, "a variable has no parent"
        return Path(self.root, self.segments[:-1])

    @property
    def last(self) -> str:
        return self.segments[-1]

    @property
    def derefs(self) -> int:
        return sum(1 for s in self.segments if s == DEREF)

    def prefixes(self) -> list["Path"]:
        return [Path(self.root, self.segments[:i]) for i in range(len(self.segments))]

    def is_prefix_of(self, other: "Path") -> bool:
        """Non-strict prefix test."""
        return (self.root == other.root
                and other.segments[:len(self.segments)] == self.segments)

    def comparable(self, other: "Path") -> bool:
        return self.is_prefix_of(other) or other.is_prefix_of(self)


def prefixes(p: Path) -> list[Path]:
    """Strict prefixes of ``p``, shortest first."""
    return p.prefixes()


class ExtensionKind(enum.Enum):
    NOT_EXTENSION = "not-extension"
    NEAR = "near"
    FAR = "far"


def extension_kind(p: Path, q: Path) -> ExtensionKind:
    if p == q or not p.is_prefix_of(q):
        return ExtensionKind.NOT_EXTENSION
    if q.derefs == p.derefs:
        return ExtensionKind.NEAR
    return ExtensionKind.FAR


# --------------------------------------------------------------------
# Expressions

@dc.dataclass(frozen=True)
class PathRef:
    path: Path
    span: Span = _span()


@dc.dataclass(frozen=True)
class IntLit:
    value: int
    span: Span = _span()


@dc.dataclass(frozen=True)
class RealLit:
    value: float
    span: Span = _span()


@dc.dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Span = _span()


@dc.dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dc.dataclass(frozen=True)
class AddressOf:
    path: Path
    span: Span = _span()


@dc.dataclass(frozen=True)
class Null:
    span: Span = _span()


ScalarLit = Union[IntLit, RealLit, BoolLit]
Expr = Union[PathRef, IntLit, RealLit, BoolLit, BinOp, AddressOf, Null]

ARITHMETIC_OPS = ("+", "-", "*", "/")
ORDERING_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("=", "/=")
LOGICAL_OPS = ("and", "or")
BINARY_OPS = ARITHMETIC_OPS + ORDERING_OPS + EQUALITY_OPS + LOGICAL_OPS

PRECEDENCE = {
    "or": 1, "and": 2,
    "<": 3, "<=": 3, ">": 3, ">=": 3, "=": 3, "/=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}


# --------------------------------------------------------------------
# Statements and declarations

@dc.dataclass(frozen=True)
class Assign:
    lhs: Path
    rhs: Expr
    span: Span = _span()
    sid: int = dc.field(default=0, compare=False, repr=False)


@dc.dataclass(frozen=True)
class Alloc:
    lhs: Path
    type: Type
    span: Span = _span()
    sid: int = dc.field(default=0, compare=False, repr=False)


@dc.dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    span: Span = _span()
    sid: int = dc.field(default=0, compare=False, repr=False)


@dc.dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    span: Span = _span()
    sid: int = dc.field(default=0, compare=False, repr=False)


@dc.dataclass(frozen=True)
class Call:
    """Procedure call. Arguments for ``in out``/``out`` modes must be
    ``PathRef`` expressions; the type checker enforces it."""

    proc: str
    args: tuple[Expr, ...]
    span: Span = _span()
    sid: int = dc.field(default=0, compare=False, repr=False)


Stmt = Union[Assign, Alloc, If, While, Call]


class Mode(enum.Enum):
    IN = "in"
    IN_OUT = "in out"
    OUT = "out"


@dc.dataclass(frozen=True)
class FieldDecl:
    name: str
    type: Type
    span: Span = _span()


@dc.dataclass(frozen=True)
class RecordDecl:
    name: str
    fields: tuple[FieldDecl, ...]
    span: Span = _span()

    def field_type(self, name: str) -> Optional[Type]:
        for f in self.fields:
            if f.name == name:
                return f.type
        return None


@dc.dataclass(frozen=True)
class Param:
    name: str
    mode: Mode
    type: Type
    span: Span = _span()


@dc.dataclass(frozen=True)
class Local:
    name: str
    type: Type
    span: Span = _span()


@dc.dataclass(frozen=True)
class ProcDecl:
    name: str
    params: tuple[Param, ...]
    locals: tuple[Local, ...]
    body: tuple[Stmt, ...]
    span: Span = _span()

    def params_of(self, mode: Mode) -> list[Param]:
        return [p for p in self.params if p.mode is mode]


@dc.dataclass(frozen=True)
class Program:
    records: tuple[RecordDecl, ...]
    procedures: tuple[ProcDecl, ...]

    def record(self, name: str) -> Optional[RecordDecl]:
        for r in self.records:
            if r.name == name:
                return r
        return None

    def procedure(self, name: str) -> Optional[ProcDecl]:
        for p in self.procedures:
            if p.name == name:
                return p
        return None


# --------------------------------------------------------------------
# Traversal helpers

def walk_stmts(stmts: tuple[Stmt, ...]) -> Iterator[Stmt]:
    """Pre-order traversal of a statement list."""
    for s in stmts:
        yield s
        match s:
            case If(then=then, orelse=orelse):
                yield from walk_stmts(then)
                yield from walk_stmts(orelse)
            case While(body=body):
                yield from walk_stmts(body)


def _renumber(stmts: tuple[Stmt, ...], counter: Iterator[int]) -> tuple[Stmt, ...]:
    out = []
    for s in stmts:
        sid = next(counter)
        match s:
            case If():
                s = dc.replace(s, sid=sid,
                               then=_renumber(s.then, counter),
                               orelse=_renumber(s.orelse, counter))
            case While():
                s = dc.replace(s, sid=sid, body=_renumber(s.body, counter))
            case _:
                s = dc.replace(s, sid=sid)
        out.append(s)
    return tuple(out)


def number_statements(program: Program) -> Program:
    """Assign statement ids in pre-order, starting at 1 in each procedure."""
    procs = tuple(dc.replace(p, body=_renumber(p.body, itertools.count(1)))
                  for p in program.procedures)
    return dc.replace(program, procedures=procs)


def expr_paths(e: Expr) -> list[Path]:
    """All paths syntactically occurring in ``e``, including under 'Access."""
    match e:
        case PathRef(path=p) | AddressOf(path=p):
            return [p]
        case BinOp(left=l, right=r):
            return expr_paths(l) + expr_paths(r)
        case _:
            return []
