"""Big-step reference interpreter with blocking semantics and a CREW monitor.

Execution is total thanks to fuel: every statement entry (including each
re-entry of a ``while`` loop) consumes one unit. Memory is never reclaimed.
In monitored mode, every sequence point checks that no two paths of the
active frame reaching the same address hold conflicting permissions.
"""
from __future__ import annotations

import dataclasses as dc
import sys
from typing import Callable, Optional, Union

from .alias import PolicyMap, SequencePoint
from .permission import NO, W, AccessPolicy, Permission
from .syntax import (
    DEREF, NOWHERE, Access, AddressOf, Alloc, Assign, BinOp, BoolLit, Call,
    Expr, If, IntLit, Mode, Named, Null, Path, PathRef, Program, RealLit,
    Scalar, ScalarKind, Span, Stmt, Type, While,
)
from .typecheck import TypeEnv, check_program

DEFAULT_FUEL = 100_000
DEFAULT_DEPTH_BOUND = 64
MAX_MONITORED_PATHS = 50_000
MAX_CALL_DEPTH = 400

INT_BITS = 64
_INT_MOD = 1 << INT_BITS
_INT_MIN = -(1 << (INT_BITS - 1))
_INT_MAX = (1 << (INT_BITS - 1)) - 1


@dc.dataclass(frozen=True)
class Address:
    """A location, or a component ``base.f.g`` inside a record stored there."""

    base: int
    chain: tuple[str, ...] = ()

    def field(self, name: str) -> "Address":
        return Address(self.base, self.chain + (name,))

    def __str__(self) -> str:
        return ".".join((f"@{self.base}", *self.chain))


class _NullValue:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "null"


NULL = _NullValue()

Value = Union[int, float, bool, Address, _NullValue, dict]


def copy_value(v: Value) -> Value:
    if isinstance(v, dict):
        return {k: copy_value(x) for k, x in v.items()}
    return v


def format_value(v: Value) -> str:
    if isinstance(v, dict):
        return "(" + ", ".join(f"{k} => {format_value(x)}" for k, x in v.items()) + ")"
    if isinstance(v, bool):
        return "True" if v else "False"
    return str(v)


class Store:
    """Locations to values; component addresses read and update in place."""

    def __init__(self):
        self.cells: dict[int, Value] = {}

    def __len__(self) -> int:
        return len(self.cells)

    def fresh(self, value: Value) -> Address:
        loc = len(self.cells)
        self.cells[loc] = value
        return Address(loc)

    def read(self, addr: Address) -> Value:
        v = self.cells[addr.base]
        for f in addr.chain:
            v = v[f]
        return v

    def write(self, addr: Address, value: Value) -> None:
        if not addr.chain:
            self.cells[addr.base] = value
            return
        v = self.cells[addr.base]
        for f in addr.chain[:-1]:
            v = v[f]
        v[addr.chain[-1]] = value


# --------------------------------------------------------------------
# Outcomes

@dc.dataclass
class Completed:
    store: Store
    binding: dict[str, Address]
    steps: int = 0
    points: int = 0


@dc.dataclass
class Blocked:
    reason: str  # null-deref | div-by-zero | overflow
    span: Span
    steps: int = 0
    points: int = 0


@dc.dataclass
class FuelExhausted:
    steps: int = 0
    reason: str = "fuel"
    points: int = 0


@dc.dataclass
class CrewViolation:
    point: SequencePoint
    p: Path
    q: Path
    perm_p: Permission
    perm_q: Permission
    address: Address
    steps: int = 0
    points: int = 0

    def __str__(self) -> str:
        return (f"CREW violated at {self.point}: {self.p} ({self.perm_p}) and "
                f"{self.q} ({self.perm_q}) both reach {self.address}")


ExecOutcome = Union[Completed, Blocked, FuelExhausted, CrewViolation]


class _Block(Exception):
    def __init__(self, reason: str, span: Span):
        self.reason = reason
        self.span = span


class _OutOfFuel(Exception):
    def __init__(self, reason: str = "fuel"):
        self.reason = reason


class _Violation(Exception):
    def __init__(self, violation: CrewViolation):
        self.violation = violation


# --------------------------------------------------------------------

def default_value(t: Type, env: TypeEnv) -> Value:
    match t:
        case Scalar(kind=ScalarKind.INTEGER):
            return 0
        case Scalar(kind=ScalarKind.REAL):
            return 0.0
        case Scalar(kind=ScalarKind.BOOLEAN):
            return False
        case Access():
            return NULL
        case Named(name=name):
            return {f.name: default_value(f.type, env) for f in env.records[name].fields}
    raise TypeError(f"not a type: {t!r}")


def eval_lval(binding: dict[str, Address], store: Store, p: Path,
              span: Span = NOWHERE) -> Address:
    addr = binding[p.root]
    for seg in p.segments:
        if seg == DEREF:
            v = store.read(addr)
            if v is NULL:
                raise _Block("null-deref", span)
            addr = v
        else:
            addr = addr.field(seg)
    return addr


def _wrap(n: int) -> int:
    return (n - _INT_MIN) % _INT_MOD + _INT_MIN


def _arith(op: str, a, b, span: Span, trap_overflow: bool):
    is_int = not isinstance(a, float)
    if op == "/":
        if b == 0:
            raise _Block("div-by-zero", span)
        if is_int:
            q = abs(a) // abs(b)
            r = q if (a >= 0) == (b >= 0) else -q
        else:
            r = a / b
    elif op == "+":
        r = a + b
    elif op == "-":
        r = a - b
    else:
        r = a * b
    if is_int and not _INT_MIN <= r <= _INT_MAX:
        if trap_overflow:
            raise _Block("overflow", span)
        r = _wrap(r)
    return r


def eval_expr(binding: dict[str, Address], store: Store, e: Expr,
              trap_overflow: bool = False) -> Value:
    match e:
        case PathRef(path=p, span=span):
            return store.read(eval_lval(binding, store, p, span))
        case IntLit(value=v) | RealLit(value=v) | BoolLit(value=v):
            return v
        case Null():
            return NULL
        case AddressOf(path=p, span=span):
            return eval_lval(binding, store, p, span)
        case BinOp(op=op, left=l, right=r, span=span):
            a = eval_expr(binding, store, l, trap_overflow)
            b = eval_expr(binding, store, r, trap_overflow)
            match op:
                case "+" | "-" | "*" | "/":
                    return _arith(op, a, b, span, trap_overflow)
                case "<":
                    return a < b
                case "<=":
                    return a <= b
                case ">":
                    return a > b
                case ">=":
                    return a >= b
                case "=":
                    return a == b
                case "/=":
                    return a != b
                case "and":
                    return a and b
                case "or":
                    return a or b
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------
# CREW monitoring

@dc.dataclass
class PathScan:
    paths: list[tuple[Path, Address]]
    skipped: int = 0


def enumerate_paths(env: TypeEnv, binding: dict[str, Address], store: Store,
                    depth_bound: int = DEFAULT_DEPTH_BOUND,
                    limit: int = MAX_MONITORED_PATHS) -> PathScan:
    """Valid paths of the frame with their addresses.

    Paths crossing a null pointer do not exist and are pruned; paths needing
    more than ``depth_bound`` dereferences, or beyond ``limit`` paths in
    total, are counted in ``skipped``.
    """
    scan = PathScan([])

    def walk(path: Path, t: Type, addr: Address, derefs: int) -> None:
        if len(scan.paths) >= limit:
            scan.skipped += 1
            return
        scan.paths.append((path, addr))
        for seg, st in env.children(t):
            if seg == DEREF:
                target = store.read(addr)
                if target is NULL:
                    continue
                if derefs >= depth_bound:
                    scan.skipped += 1
                    continue
                walk(path.deref(), st, target, derefs + 1)
            else:
                walk(path.field(seg), st, addr.field(seg), derefs)

    for name, addr in binding.items():
        walk(Path(name), env.variable_type(name), addr, 0)
    return scan


def crew_check(env: TypeEnv, binding: dict[str, Address], store: Store,
               policy: AccessPolicy, point: Optional[SequencePoint] = None,
               depth_bound: int = DEFAULT_DEPTH_BOUND) -> Optional[CrewViolation]:
    """First pair of distinct aliasing paths where one may write and the
    other has any permission, or None."""
    return _crew(enumerate_paths(env, binding, store, depth_bound), policy, point)


def _crew(scan: PathScan, policy: AccessPolicy,
          point: Optional[SequencePoint]) -> Optional[CrewViolation]:
    groups: dict[Address, list[Path]] = {}
    for path, addr in scan.paths:
        groups.setdefault(addr, []).append(path)
    for addr, paths in groups.items():
        if len(paths) < 2:
            continue
        perms = [policy.get(p) for p in paths]
        for i, (p, pp) in enumerate(zip(paths, perms)):
            if not W <= pp:
                continue
            for j, (q, pq) in enumerate(zip(paths, perms)):
                if i != j and pq is not NO:
                    return CrewViolation(point, p, q, pp, pq, addr)
    return None


# --------------------------------------------------------------------

class Interpreter:
    def __init__(self, program: Program, envs: Optional[dict[str, TypeEnv]] = None, *,
                 fuel: int = DEFAULT_FUEL, policies: Optional[PolicyMap] = None,
                 depth_bound: int = DEFAULT_DEPTH_BOUND, trap_overflow: bool = False,
                 max_call_depth: int = MAX_CALL_DEPTH,
                 trace: Optional[Callable[[str], None]] = None):
        self.program = program
        self.envs = envs if envs is not None else check_program(program)
        self.procs = {p.name: p for p in program.procedures}
        self.fuel = fuel
        self.steps = 0
        self.policies = policies
        self.depth_bound = depth_bound
        self.trap_overflow = trap_overflow
        self.max_call_depth = max_call_depth
        self.trace = trace
        self.store = Store()
        self.points_monitored = 0
        self.unmonitored_paths = 0
        self._depth = 0

    @property
    def monitored(self) -> bool:
        return self.policies is not None

    def run(self, entry: str = "Main") -> ExecOutcome:
        proc = self.procs[entry]
        env = self.envs[entry]
        binding = {v.name: self.store.fresh(default_value(v.type, env)) for v in proc.locals}
        # each call level costs a handful of Python frames
        needed = 40 * (self.max_call_depth + 10)
        if sys.getrecursionlimit() < needed:
            sys.setrecursionlimit(needed)
        try:
            self.exec_seq(entry, binding, proc.body)
        except _Block as b:
            return Blocked(b.reason, b.span, self.steps, self.points_monitored)
        except _OutOfFuel as f:
            return FuelExhausted(self.steps, f.reason, self.points_monitored)
        except _Violation as v:
            v.violation.steps = self.steps
            v.violation.points = self.points_monitored
            return v.violation
        return Completed(self.store, binding, self.steps, self.points_monitored)

    def _point(self, proc: str, binding: dict[str, Address], s: Stmt, when: str) -> None:
        if not self.monitored and self.trace is None:
            return
        key = SequencePoint(proc, s.sid, when)
        npaths = 0
        if self.monitored:
            policy = self.policies.get(key)
            if policy is not None:
                scan = enumerate_paths(self.envs[proc], binding, self.store, self.depth_bound)
                self.points_monitored += 1
                self.unmonitored_paths += scan.skipped
                npaths = len(scan.paths)
                found = _crew(scan, policy, key)
                if found is not None:
                    raise _Violation(found)
        if self.trace is not None:
            self.trace(f"{key}\t{len(self.store)}\t{npaths}")

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise _OutOfFuel()

    def exec_seq(self, proc: str, binding: dict[str, Address], stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            self.exec_stmt(proc, binding, s)

    def _eval(self, binding, e: Expr) -> Value:
        return eval_expr(binding, self.store, e, self.trap_overflow)

    def exec_stmt(self, proc: str, binding: dict[str, Address], s: Stmt) -> None:
        self._tick()
        self._point(proc, binding, s, "before")
        store = self.store
        match s:
            case Assign(lhs=lhs, rhs=rhs, span=span):
                v = copy_value(self._eval(binding, rhs))
                store.write(eval_lval(binding, store, lhs, span), v)
            case Alloc(lhs=lhs, type=t, span=span):
                target = eval_lval(binding, store, lhs, span)
                store.write(target, store.fresh(default_value(t, self.envs[proc])))
            case If(cond=c, then=then, orelse=orelse):
                self.exec_seq(proc, binding, then if self._eval(binding, c) else orelse)
            case While(cond=c, body=body):
                while self._eval(binding, c):
                    self.exec_seq(proc, binding, body)
                    self._tick()
                    self._point(proc, binding, s, "before")
            case Call():
                self._call(binding, s)
        self._point(proc, binding, s, "after")

    def _call(self, binding: dict[str, Address], s: Call) -> None:
        callee = self.procs[s.proc]
        env = self.envs[s.proc]
        store = self.store
        values, addresses = [], []
        for param, arg in zip(callee.params, s.args):
            if param.mode is Mode.IN:
                values.append(copy_value(self._eval(binding, arg)))
                addresses.append(None)
            else:
                values.append(None)
                addresses.append(eval_lval(binding, store, arg.path, s.span))
        frame: dict[str, Address] = {}
        for param, v, a in zip(callee.params, values, addresses):
            frame[param.name] = store.fresh(v) if param.mode is Mode.IN else a
        for local in callee.locals:
            frame[local.name] = store.fresh(default_value(local.type, env))
        if self._depth >= self.max_call_depth:
            raise _OutOfFuel("call-depth")
        self._depth += 1
        try:
            self.exec_seq(s.proc, frame, callee.body)
        finally:
            self._depth -= 1


def run_program(program: Program, fuel: int = DEFAULT_FUEL, monitored: bool = False,
                policy_map: Optional[PolicyMap] = None, *,
                envs: Optional[dict[str, TypeEnv]] = None, **kwargs) -> ExecOutcome:
    """Execute ``Main``. ``policy_map`` is required when ``monitored``."""
    if monitored and policy_map is None:
        raise ValueError("monitored runs need a policy map")
    interp = Interpreter(program, envs, fuel=fuel,
                         policies=policy_map if monitored else None, **kwargs)
    return interp.run()
