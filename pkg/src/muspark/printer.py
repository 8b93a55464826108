"""Canonical pretty printer; ``parse(pretty_print(p)) == p`` for every program."""
from __future__ import annotations

from decimal import Decimal

from .syntax import (
    PRECEDENCE, AddressOf, Alloc, Assign, BinOp, BoolLit, Call, Expr,
    If, IntLit, Null, PathRef, ProcDecl, Program, RealLit, RecordDecl,
    Stmt, Type, While,
)

INDENT = "   "
_ATOM = 10


def format_type(t: Type) -> str:
    return str(t)


def format_real(value: float) -> str:
    text = format(Decimal(repr(value)), "f")
    return text if "." in text else text + ".0"


def _prec(e: Expr) -> int:
    return PRECEDENCE[e.op] if isinstance(e, BinOp) else _ATOM


def format_expr(e: Expr) -> str:
    match e:
        case PathRef(path=p):
            return str(p)
        case AddressOf(path=p):
            return f"{p}'Access"
        case IntLit(value=v):
            return str(v)
        case RealLit(value=v):
            return format_real(v)
        case BoolLit(value=v):
            return "True" if v else "False"
        case Null():
            return "null"
        case BinOp(op=op, left=l, right=r):
            p = PRECEDENCE[op]
            # relations do not associate
            left_wrap = _prec(l) < p or (p == 3 and _prec(l) == 3)
            right_wrap = _prec(r) <= p
            ls = format_expr(l)
            rs = format_expr(r)
            if left_wrap:
                ls = f"({ls})"
            if right_wrap:
                rs = f"({rs})"
            return f"{ls} {op} {rs}"
    raise TypeError(f"not an expression: {e!r}")


def _stmts(stmts: tuple[Stmt, ...], depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for s in stmts:
        match s:
            case Assign(lhs=lhs, rhs=rhs):
                out.append(f"{pad}{lhs} := {format_expr(rhs)};")
            case Alloc(lhs=lhs, type=t):
                out.append(f"{pad}{lhs} := new {format_type(t)};")
            case If(cond=c, then=then, orelse=orelse):
                out.append(f"{pad}if {format_expr(c)} then")
                _stmts(then, depth + 1, out)
                if orelse:
                    out.append(f"{pad}else")
                    _stmts(orelse, depth + 1, out)
                out.append(f"{pad}end if;")
            case While(cond=c, body=body):
                out.append(f"{pad}while {format_expr(c)} loop")
                _stmts(body, depth + 1, out)
                out.append(f"{pad}end loop;")
            case Call(proc=name, args=args):
                if args:
                    out.append(f"{pad}{name}({', '.join(format_expr(a) for a in args)});")
                else:
                    out.append(f"{pad}{name};")


def format_stmt(s: Stmt) -> str:
    out: list[str] = []
    _stmts((s,), 0, out)
    return "\n".join(out)


def _record(r: RecordDecl, out: list[str]) -> None:
    out.append(f"type {r.name} is record")
    for f in r.fields:
        out.append(f"{INDENT}{f.name} : {format_type(f.type)};")
    out.append("end record;")


def _procedure(p: ProcDecl, out: list[str]) -> None:
    header = f"procedure {p.name}"
    if p.params:
        params = "; ".join(f"{x.name} : {x.mode.value} {format_type(x.type)}"
                           for x in p.params)
        header += f" ({params})"
    out.append(header + " is")
    for v in p.locals:
        out.append(f"{INDENT}{v.name} : {format_type(v.type)};")
    out.append("begin")
    _stmts(p.body, 1, out)
    out.append(f"end {p.name};")


def pretty_print(program: Program) -> str:
    blocks: list[list[str]] = []
    for r in program.records:
        blocks.append([])
        _record(r, blocks[-1])
    for p in program.procedures:
        blocks.append([])
        _procedure(p, blocks[-1])
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"
