"""Type checking for muSPARK and the type-level queries the analysis needs."""
from __future__ import annotations

import dataclasses as dc
from typing import Optional, Union

from .syntax import (
    ARITHMETIC_OPS, BOOLEAN, DEREF, EQUALITY_OPS, LOGICAL_OPS, NOWHERE,
    ORDERING_OPS, Access, AddressOf, Alloc, Assign, BinOp, BoolLit, Call, Expr,
    If, IntLit, Mode, Named, Null, Path, PathRef, ProcDecl, Program, RealLit,
    RecordDecl, Scalar, Span, Stmt, Type, While, INTEGER, REAL,
)


@dc.dataclass(frozen=True)
class NullType:
    """Type of the ``null`` literal; compatible with every access type."""

    def __str__(self) -> str:
        return "access <any>"


NULL_TYPE = NullType()
ExprType = Union[Type, NullType]

CODES = (
    "unknown-name", "unknown-field", "deref-of-non-access", "binop-non-scalar",
    "mode-arg-not-path", "alloc-type-mismatch", "duplicate-name", "missing-main",
    "forward-record-ref", "arity-mismatch", "arg-type-mismatch",
    "assign-type-mismatch", "cond-not-boolean",
)


class TypeCheckError(Exception):
    def __init__(self, code: str, message: str, span: Span = NOWHERE):
        assert code in CODES, code
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span

    def __repr__(self) -> str:
        return f"TypeCheckError({self.code!r}, {self.message!r}, {self.span})"


class ProgramTypeError(Exception):
    """Raised by :func:`check_program` with every detected error."""

    def __init__(self, errors: list[TypeCheckError]):
        super().__init__(f"{len(errors)} type error(s): " + "; ".join(e.message for e in errors[:3]))
        self.errors = errors


def compatible(expected: Type, actual: ExprType) -> bool:
    if isinstance(actual, NullType):
        return isinstance(expected, Access)
    return expected == actual


class TypeEnv:
    """Record table plus the variables of one procedure (or none)."""

    def __init__(self, records: dict[str, RecordDecl],
                 variables: Optional[dict[str, tuple[Type, Optional[Mode]]]] = None,
                 procedure: Optional[ProcDecl] = None):
        self.records = records
        self.variables = variables or {}
        self.procedure = procedure
        self._deep: dict[Type, bool] = {}
        self._path_types: dict[Path, Type] = {}

    @classmethod
    def for_procedure(cls, records: dict[str, RecordDecl], proc: ProcDecl) -> "TypeEnv":
        variables: dict[str, tuple[Type, Optional[Mode]]] = {}
        for p in proc.params:
            variables[p.name] = (p.type, p.mode)
        for v in proc.locals:
            variables[v.name] = (v.type, None)
        return cls(records, variables, proc)

    def variable_type(self, name: str) -> Type:
        return self.variables[name][0]

    def mode(self, name: str) -> Optional[Mode]:
        return self.variables[name][1]

    # -- path typing -----------------------------------------------------
    def segment_type(self, t: Type, seg: str) -> Optional[Type]:
        """Type reached from ``t`` through ``seg``, or None if invalid."""
        if seg == DEREF:
            return t.element if isinstance(t, Access) else None
        if isinstance(t, Named) and t.name in self.records:
            return self.records[t.name].field_type(seg)
        return None

    def children(self, t: Type) -> list[tuple[str, Type]]:
        """Valid one-segment extensions of a ``t``-typed path."""
        if isinstance(t, Access):
            return [(DEREF, t.element)]
        if isinstance(t, Named) and t.name in self.records:
            return [(f.name, f.type) for f in self.records[t.name].fields]
        return []

    def type_of_path(self, p: Path, span: Span = NOWHERE) -> Type:
        cached = self._path_types.get(p)
        if cached is not None:
            return cached
        if p.root not in self.variables:
            raise TypeCheckError("unknown-name", f"unknown variable '{p.root}'", span)
        t = self.variable_type(p.root)
        for i, seg in enumerate(p.segments):
            nxt = self.segment_type(t, seg)
            if nxt is None:
                prefix = Path(p.root, p.segments[:i])
                if seg == DEREF:
                    raise TypeCheckError("deref-of-non-access",
                                         f"'{prefix}' of type {t} cannot be dereferenced", span)
                raise TypeCheckError("unknown-field",
                                     f"type {t} of '{prefix}' has no field '{seg}'", span)
            t = nxt
        self._path_types[p] = t
        return t

    def is_deep(self, t: ExprType) -> bool:
        if isinstance(t, (Access, NullType)):
            return True
        if isinstance(t, Scalar):
            return False
        if t not in self._deep:
            # recursion among records only goes through access types
            self._deep[t] = any(self.is_deep(ft) for _, ft in self.children(t))
        return self._deep[t]

    def is_deep_path(self, p: Path) -> bool:
        return self.is_deep(self.type_of_path(p))

    # -- expressions -------------------------------------------------------
    def type_of_expr(self, e: Expr) -> ExprType:
        match e:
            case PathRef(path=p, span=span):
                return self.type_of_path(p, span)
            case IntLit():
                return INTEGER
            case RealLit():
                return REAL
            case BoolLit():
                return BOOLEAN
            case Null():
                return NULL_TYPE
            case AddressOf(path=p, span=span):
                return Access(self.type_of_path(p, span))
            case BinOp(op=op, left=l, right=r, span=span):
                lt, rt = self.type_of_expr(l), self.type_of_expr(r)
                for t in (lt, rt):
                    if isinstance(t, (Access, Named)):
                        raise TypeCheckError("binop-non-scalar",
                                             f"operator '{op}' applied to non-scalar type {t}", span)
                    if isinstance(t, NullType):
                        raise TypeCheckError("arg-type-mismatch",
                                             f"null is not a valid operand of '{op}'", span)
                if lt != rt:
                    raise TypeCheckError("arg-type-mismatch",
                                         f"operands of '{op}' have types {lt} and {rt}", span)
                if op in ARITHMETIC_OPS:
                    if lt not in (INTEGER, REAL):
                        raise TypeCheckError("arg-type-mismatch",
                                             f"operator '{op}' needs numeric operands, got {lt}", span)
                    return lt
                if op in ORDERING_OPS:
                    if lt not in (INTEGER, REAL):
                        raise TypeCheckError("arg-type-mismatch",
                                             f"operator '{op}' needs numeric operands, got {lt}", span)
                    return BOOLEAN
                if op in EQUALITY_OPS:
                    return BOOLEAN
                assert op in LOGICAL_OPS, op
                if lt != BOOLEAN:
                    raise TypeCheckError("arg-type-mismatch",
                                         f"operator '{op}' needs Boolean operands, got {lt}", span)
                return BOOLEAN
        raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------

def type_of_path(env: TypeEnv, p: Path) -> Type:
    return env.type_of_path(p)


def type_of_expr(env: TypeEnv, e: Expr) -> ExprType:
    return env.type_of_expr(e)


def is_deep(env: TypeEnv, t: ExprType) -> bool:
    return env.is_deep(t)


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.errors: list[TypeCheckError] = []
        self.records: dict[str, RecordDecl] = {}
        self.procs: dict[str, ProcDecl] = {}

    def error(self, code: str, message: str, span: Span) -> None:
        self.errors.append(TypeCheckError(code, message, span))

    def check_type(self, t: Type, span: Span, *, declared: Optional[set[str]] = None,
                   current: Optional[str] = None, via_access: bool = False) -> None:
        match t:
            case Access(element=inner):
                self.check_type(inner, span, declared=declared, current=current, via_access=True)
            case Named(name=name):
                if declared is None:
                    if name not in self.records:
                        self.error("unknown-name", f"unknown type '{name}'", span)
                    return
                if name in declared or (via_access and name == current):
                    return
                if name == current or any(r.name == name for r in self.program.records):
                    self.error("forward-record-ref",
                               f"record '{current}' refers to '{name}' before its declaration"
                               + ("" if via_access else " (only access types may recurse)"), span)
                else:
                    self.error("unknown-name", f"unknown type '{name}'", span)

    def run(self) -> dict[str, TypeEnv]:
        declared: set[str] = set()
        field_names: set[str] = set()
        for r in self.program.records:
            if r.name in self.records or r.name in ("Integer", "Real", "Boolean"):
                self.error("duplicate-name", f"duplicate type name '{r.name}'", r.span)
            for f in r.fields:
                if f.name in field_names:
                    self.error("duplicate-name", f"duplicate field name '{f.name}'", f.span)
                field_names.add(f.name)
                self.check_type(f.type, f.span, declared=declared, current=r.name)
            declared.add(r.name)
            self.records.setdefault(r.name, r)

        for p in self.program.procedures:
            if p.name in self.procs:
                self.error("duplicate-name", f"duplicate procedure name '{p.name}'", p.span)
            self.procs.setdefault(p.name, p)
        main = self.procs.get("Main")
        if main is None:
            self.error("missing-main", "program has no procedure 'Main'", NOWHERE)
        elif main.params:
            self.error("missing-main", "procedure 'Main' must have no parameters", main.span)

        envs = {}
        for p in self.program.procedures:
            envs[p.name] = self.procedure(p)
        return envs

    def procedure(self, proc: ProcDecl) -> TypeEnv:
        seen: set[str] = set()
        for v in (*proc.params, *proc.locals):
            if v.name in seen:
                self.error("duplicate-name", f"duplicate variable '{v.name}' in '{proc.name}'", v.span)
            seen.add(v.name)
            self.check_type(v.type, v.span)
        env = TypeEnv.for_procedure(self.records, proc)
        self.stmts(env, proc.body)
        return env

    def stmts(self, env: TypeEnv, stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            try:
                self.stmt(env, s)
            except TypeCheckError as e:
                self.errors.append(e)

    def expr(self, env: TypeEnv, e: Expr) -> Optional[ExprType]:
        try:
            return env.type_of_expr(e)
        except TypeCheckError as err:
            self.errors.append(err)
            return None

    def condition(self, env: TypeEnv, cond: Expr, span: Span) -> None:
        t = self.expr(env, cond)
        if t is not None and t != BOOLEAN:
            self.error("cond-not-boolean", f"condition has type {t}, expected Boolean", span)

    def stmt(self, env: TypeEnv, s: Stmt) -> None:
        match s:
            case Assign(lhs=lhs, rhs=rhs, span=span):
                lt = env.type_of_path(lhs, span)
                rt = self.expr(env, rhs)
                if rt is not None and not compatible(lt, rt):
                    self.error("assign-type-mismatch",
                               f"cannot assign {rt} to '{lhs}' of type {lt}", span)
            case Alloc(lhs=lhs, type=t, span=span):
                lt = env.type_of_path(lhs, span)
                if isinstance(t, Named) and t.name not in self.records:
                    raise TypeCheckError("unknown-name", f"unknown type '{t.name}'", span)
                if lt != Access(t):
                    self.error("alloc-type-mismatch",
                               f"'{lhs}' has type {lt}, 'new {t}' needs access {t}", span)
            case If(cond=c, then=then, orelse=orelse, span=span):
                self.condition(env, c, span)
                self.stmts(env, then)
                self.stmts(env, orelse)
            case While(cond=c, body=body, span=span):
                self.condition(env, c, span)
                self.stmts(env, body)
            case Call(proc=name, args=args, span=span):
                callee = self.procs.get(name)
                if callee is None:
                    raise TypeCheckError("unknown-name", f"unknown procedure '{name}'", span)
                if len(args) != len(callee.params):
                    raise TypeCheckError("arity-mismatch",
                                         f"'{name}' takes {len(callee.params)} argument(s), "
                                         f"{len(args)} given", span)
                for i, (param, arg) in enumerate(zip(callee.params, args), 1):
                    if param.mode is not Mode.IN and not isinstance(arg, PathRef):
                        self.error("mode-arg-not-path",
                                   f"argument {i} of '{name}' is '{param.mode.value}' "
                                   "and must be a path", span)
                        continue
                    at = self.expr(env, arg)
                    if at is None:
                        continue
                    if not compatible(param.type, at):
                        self.error("arg-type-mismatch",
                                   f"argument {i} of '{name}' has type {at}, expected {param.type}",
                                   span)


def check_program(program: Program) -> dict[str, TypeEnv]:
    """Type check ``program``; returns one environment per procedure.

    Raises :class:`ProgramTypeError` listing every detected error.
    """
    checker = _Checker(program)
    envs = checker.run()
    if checker.errors:
        raise ProgramTypeError(checker.errors)
    return envs
