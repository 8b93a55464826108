"""Random well-typed programs and the differential campaign run over them.

Generation is type-directed, so every program type checks. In guided mode
the generator also consults the alias checker while it builds a procedure
and mostly keeps statements the checker accepts; that keeps the accepted
fraction high enough for the soundness properties to bite. Unguided mode
produces arbitrary aliasing and serves as the monitor's negative control.
"""
from __future__ import annotations

import dataclasses as dc
import json
import random
from typing import Callable, Iterator, Optional

from .alias import AliasChecker, AliasViolation, check_program_aliasing
from .interp import (
    DEFAULT_FUEL, Blocked, Completed, CrewViolation, FuelExhausted, run_program,
)
from .parser import parse
from .permission import NO, R, RW, W, AccessPolicy, consistency_violations
from .printer import pretty_print
from .syntax import (
    BOOLEAN, INTEGER, REAL, Access, AddressOf, Alloc, Assign, BinOp,
    BoolLit, Call, Expr, FieldDecl, If, IntLit, Local, Mode, Named, Null, Param,
    Path, PathRef, ProcDecl, Program, RealLit, RecordDecl, Scalar, Stmt, Type,
    While, deref_nesting, number_statements, walk_stmts,
)
from .typecheck import ProgramTypeError, TypeEnv, check_program


@dc.dataclass
class GenConfig:
    seed: int = 0
    max_records: int = 3
    max_fields: int = 3
    max_nesting: int = 2
    max_procedures: int = 3
    max_params: int = 3
    max_locals: int = 3
    max_stmts: int = 6
    max_expr_depth: int = 2
    max_block_depth: int = 2
    max_path_length: int = 3
    max_loop_iterations: int = 3
    loop_prob: float = 0.12
    if_prob: float = 0.12
    call_prob: float = 0.15
    alloc_prob: float = 0.15
    deep_assign_prob: float = 0.3
    overlap_prob: float = 0.05
    guided: bool = True
    accept_bias: float = 0.9

    def __post_init__(self):
        for f in dc.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (int, float)) and not isinstance(v, bool) and v < 0:
                raise ValueError(f"{f.name} must be >= 0")

    @classmethod
    def from_json(cls, text: str) -> "GenConfig":
        return cls(**json.loads(text))

    def to_json(self) -> str:
        return json.dumps(dc.asdict(self), sort_keys=True)


_SCALARS = (INTEGER, BOOLEAN, REAL)

#: Settings for the negative control: no checker guidance and plenty of
#: sharing, so unchecked runs actually produce aliased writes.
NEGATIVE_CONTROL = GenConfig(guided=False, overlap_prob=0.5, call_prob=0.3,
                             deep_assign_prob=0.5)

#: Guided settings with frequent overlapping call arguments; a weakened
#: borrow only shows up when a prefix and its extension are lent together.
MUTATION_PROBE = GenConfig(overlap_prob=0.6, call_prob=0.35, max_params=4)


class _ProcGen:
    """Statement generation inside one procedure."""

    def __init__(self, gen: "_Generator", proc: ProcDecl, callees: list[ProcDecl],
                 counters: list[str]):
        self.gen = gen
        self.rng = gen.rng
        self.cfg = gen.cfg
        self.proc = proc
        self.callees = callees
        self.counters = list(counters)
        self.used_counters: list[str] = []
        self.env = TypeEnv.for_procedure(gen.record_table, proc)
        program = Program(tuple(gen.records), tuple(callees) + (proc,))
        self.checker = AliasChecker(program, {proc.name: self.env})
        self.checker._proc = proc.name
        self.pool = [(p, t) for p, t in self._paths() if p.root not in self.counters]
        self.budget = self.cfg.max_stmts

    def _paths(self) -> Iterator[tuple[Path, Type]]:
        limit = self.cfg.max_path_length

        def walk(p: Path, t: Type):
            yield p, t
            if len(p) < limit:
                for seg, st in self.env.children(t):
                    yield from walk(p.field(seg), st)

        for name, (t, _) in self.env.variables.items():
            yield from walk(Path(name), t)

    # -- policy-aware choices ------------------------------------------------
    def _ok(self, pol: Optional[AccessPolicy], p: Path, need) -> bool:
        return pol is None or need <= pol.get(p)

    def paths(self, pol, pred: Callable[[Type], bool], need=NO) -> list[Path]:
        return [p for p, t in self.pool if pred(t) and self._ok(pol, p, need)]

    def pick(self, items):
        return self.rng.choice(items) if items else None

    # -- expressions -----------------------------------------------------------
    def literal(self, t: Scalar) -> Expr:
        if t == INTEGER:
            return IntLit(self.rng.randint(0, 9))
        if t == REAL:
            return RealLit(self.rng.randint(0, 40) / 4)
        return BoolLit(self.rng.random() < 0.5)

    def scalar_expr(self, t: Scalar, pol, depth: int) -> Expr:
        r = self.rng.random()
        if depth > 0 and r < 0.35:
            if t == BOOLEAN:
                kind = self.rng.random()
                if kind < 0.5:
                    op = self.rng.choice(("<", "<=", ">", ">=", "=", "/="))
                    st = self.rng.choice((INTEGER, REAL))
                    return BinOp(op, self.scalar_expr(st, pol, depth - 1),
                                 self.scalar_expr(st, pol, depth - 1))
                op = self.rng.choice(("and", "or", "=", "/="))
                return BinOp(op, self.scalar_expr(t, pol, depth - 1),
                             self.scalar_expr(t, pol, depth - 1))
            op = self.rng.choice(("+", "-", "*", "+", "-", "/"))
            right = (self.literal(t) if op == "/" else self.scalar_expr(t, pol, depth - 1))
            if op == "/" and right.value == 0:
                right = dc.replace(right, value=1 if t == INTEGER else 1.0)
            return BinOp(op, self.scalar_expr(t, pol, depth - 1), right)
        if r < 0.75:
            p = self.pick(self.paths(pol, lambda x: x == t, R))
            if p is not None:
                return PathRef(p)
        return self.literal(t)

    def value_expr(self, t: Type, pol, move: bool) -> Optional[Expr]:
        """Expression of type ``t``; deep values come from paths we may move."""
        if isinstance(t, Scalar):
            return self.scalar_expr(t, pol, self.cfg.max_expr_depth)
        need = RW if move else R
        if not self.env.is_deep(t):
            need = R
        choices: list[Expr] = []
        if isinstance(t, Access):
            if self.rng.random() < 0.3:
                return Null()
            choices += [AddressOf(p) for p in self.paths(pol, lambda x: x == t.element, need)]
        choices += [PathRef(p) for p in self.paths(pol, lambda x: x == t, need)]
        if not choices:
            return Null() if isinstance(t, Access) else None
        return self.pick(choices)

    # -- statements ------------------------------------------------------------
    def reinit(self, p: Path, t: Type, depth: int = 0) -> list[Stmt]:
        """Statements giving ``p`` full ownership of a fresh value."""
        if isinstance(t, Scalar):
            return [Assign(p, self.literal(t))]
        if isinstance(t, Access):
            if depth < 2 and self.rng.random() < 0.6:
                return [Alloc(p, t.element)] + self.reinit(p.deref(), t.element, depth + 1)
            return [Assign(p, Null())]
        out: list[Stmt] = []
        for f in self.gen.record_table[t.name].fields:
            out += self.reinit(p.field(f.name), f.type, depth)
        return out

    def simple(self, pol) -> list[Stmt]:
        rng = self.rng
        r = rng.random()
        if r < self.cfg.alloc_prob:
            p = self.pick(self.paths(pol, lambda t: isinstance(t, Access), W))
            if p is not None:
                t = self.env.type_of_path(p)
                if rng.random() < 0.5:
                    return self.reinit(p, t)
                return [Alloc(p, t.element)]
        if r < self.cfg.alloc_prob + self.cfg.deep_assign_prob:
            p = self.pick(self.paths(pol, lambda t: not isinstance(t, Scalar), W))
            if p is not None:
                t = self.env.type_of_path(p)
                e = self.value_expr(t, pol, move=True)
                if e is not None:
                    return [Assign(p, e)]
        p = self.pick(self.paths(pol, lambda t: isinstance(t, Scalar), W))
        if p is None:
            return []
        t = self.env.type_of_path(p)
        return [Assign(p, self.scalar_expr(t, pol, self.cfg.max_expr_depth))]

    def call(self, pol) -> list[Stmt]:
        if not self.callees:
            return []
        callee = self.rng.choice(self.callees)
        args: list[Expr] = []
        lent: list[Path] = []
        for param in callee.params:
            if param.mode is Mode.IN:
                e = self.value_expr(param.type, pol, move=False)
                if e is None:
                    return []
                args.append(e)
                continue
            need = RW if param.mode is Mode.IN_OUT else W
            overlapping = [q for q in self.paths(None, lambda x: x == param.type)
                           if any(q.comparable(l) for l in lent)]
            if overlapping and self.rng.random() < self.cfg.overlap_prob:
                p = self.rng.choice(overlapping)
            else:
                p = self.pick([q for q in self.paths(pol, lambda x: x == param.type, need)
                               if pol is None or not any(q.comparable(l) for l in lent)])
            if p is None:
                return []
            lent.append(p)
            args.append(PathRef(p))
        return [Call(callee.name, tuple(args))]

    def condition(self, pol) -> Expr:
        return self.scalar_expr(BOOLEAN, pol, self.cfg.max_expr_depth)

    def compound(self, pol, depth: int) -> list[Stmt]:
        rng = self.rng
        if rng.random() < self.cfg.if_prob / (self.cfg.if_prob + self.cfg.loop_prob or 1):
            cond = self.condition(pol)
            then, _ = self.block(pol, depth + 1)
            orelse, _ = self.block(pol, depth + 1) if rng.random() < 0.6 else ((), pol)
            return [If(cond, then, orelse)]
        if not self.counters:
            return []
        k = self.counters.pop(0)
        self.used_counters.append(k)
        init = Assign(Path(k), IntLit(0))
        inner = pol
        if pol is not None:
            inner = self.checker.check_stmt(pol, init)
        body, _ = self.block(inner, depth + 1)
        step = Assign(Path(k), BinOp("+", PathRef(Path(k)), IntLit(1)))
        bound = IntLit(rng.randint(0, self.cfg.max_loop_iterations))
        cond = BinOp("<", PathRef(Path(k)), bound)
        if rng.random() < 0.5:
            cond = BinOp("and", cond, self.condition(inner))
        return [init, While(cond, body + (step,))]

    def candidate(self, pol, depth: int) -> list[Stmt]:
        r = self.rng.random()
        if depth < self.cfg.max_block_depth and r < self.cfg.if_prob + self.cfg.loop_prob:
            return self.compound(pol, depth)
        if r < self.cfg.if_prob + self.cfg.loop_prob + self.cfg.call_prob:
            return self.call(pol)
        return self.simple(pol)

    def _try(self, pol, stmts: list[Stmt]) -> Optional[AccessPolicy]:
        try:
            for s in stmts:
                pol = self.checker.check_stmt(pol, s)
            return pol
        except AliasViolation:
            return None

    def block(self, pol, depth: int) -> tuple[tuple[Stmt, ...], Optional[AccessPolicy]]:
        out: list[Stmt] = []
        n = self.rng.randint(0, max(0, min(self.budget, self.cfg.max_stmts)))
        for _ in range(n):
            if self.budget <= 0:
                break
            self.budget -= 1
            if pol is None:
                out += self.candidate(None, depth)
                continue
            rejected: list[Stmt] = []
            for _attempt in range(6):
                stmts = self.candidate(pol, depth)
                if not stmts:
                    continue
                after = self._try(pol, stmts)
                if after is not None:
                    out += stmts
                    pol = after
                    break
                rejected = stmts
            else:
                if rejected and self.rng.random() >= self.cfg.accept_bias:
                    # a deliberate violation; nothing after it is checked
                    out += rejected
                    return tuple(out), None
        return tuple(out), pol

    def repair(self, pol, roots: list[Param]) -> list[Stmt]:
        """Re-initialize in out / out parameters that lost full ownership."""
        out: list[Stmt] = []
        for p in roots:
            root = Path(p.name)
            if pol is not None and pol.get(root) is RW:
                continue
            stmts = self.reinit(root, p.type, depth=2)
            if pol is None:
                out += stmts
                continue
            after = self._try(pol, stmts)
            if after is not None:
                out += stmts
                pol = after
        return out


class _Generator:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.records: list[RecordDecl] = []
        self.record_table: dict[str, RecordDecl] = {}
        self.field_counter = 0

    def scalar(self) -> Scalar:
        return self.rng.choice(_SCALARS)

    def type(self, upto: int, allow_self: bool = False) -> Type:
        """A type over the first ``upto`` records (``upto`` itself via access
        when ``allow_self``)."""
        rng = self.rng
        r = rng.random()
        if r < 0.35 or (upto == 0 and not allow_self):
            t: Type = self.scalar()
            if rng.random() < 0.35:
                for _ in range(rng.randint(1, max(1, self.cfg.max_nesting))):
                    t = Access(t)
            return t
        if r < 0.55 and upto > 0:
            return Named(f"R{rng.randrange(upto)}")
        hi = upto + (1 if allow_self else 0)
        if hi == 0:
            return Access(self.scalar())
        return Access(Named(f"R{rng.randrange(hi)}"))

    def gen_records(self) -> None:
        for i in range(self.rng.randint(0, self.cfg.max_records)):
            fields = []
            for _ in range(self.rng.randint(1, max(1, self.cfg.max_fields))):
                t = self.type(i, allow_self=True)
                fields.append(FieldDecl(f"F{self.field_counter}", t))
                self.field_counter += 1
            rec = RecordDecl(f"R{i}", tuple(fields))
            self.records.append(rec)
            self.record_table[rec.name] = rec

    def any_type(self) -> Type:
        return self.type(len(self.records))

    def procedure(self, name: str, callees: list[ProcDecl], with_params: bool) -> ProcDecl:
        rng, cfg = self.rng, self.cfg
        params = []
        if with_params:
            for i in range(rng.randint(0, cfg.max_params)):
                mode = rng.choice((Mode.IN, Mode.IN_OUT, Mode.OUT))
                params.append(Param(f"A{i}", mode, self.any_type()))
        locals_ = [Local(f"V{i}", self.any_type()) for i in range(rng.randint(0, cfg.max_locals))]
        counters = [f"K{i}" for i in range(cfg.max_block_depth * 2)]
        stub = ProcDecl(name, tuple(params), tuple(locals_ + [Local(k, INTEGER) for k in counters]), ())
        pg = _ProcGen(self, stub, callees, counters)
        pol = pg.checker.initial_policy(stub) if cfg.guided else None
        body: list[Stmt] = []
        if cfg.max_stmts > 0:
            # initialize some locals so there is data to alias
            for v in locals_:
                if rng.random() < 0.7:
                    stmts = pg.reinit(Path(v.name), v.type)
                    after = pg._try(pol, stmts) if pol is not None else None
                    if pol is None or after is not None:
                        body += stmts
                        pol = after
            more, pol = pg.block(pol, 0)
            body += more
            if pol is not None or not cfg.guided:
                body += pg.repair(pol, [p for p in params if p.mode is not Mode.IN])
        used = set(pg.used_counters)
        all_locals = tuple(locals_) + tuple(Local(k, INTEGER) for k in counters if k in used)
        return ProcDecl(name, tuple(params), all_locals, tuple(body))

    def program(self) -> Program:
        self.gen_records()
        procs: list[ProcDecl] = []
        for i in range(self.rng.randint(0, self.cfg.max_procedures)):
            procs.append(self.procedure(f"P{i}", list(procs), with_params=True))
        procs.append(self.procedure("Main", list(procs), with_params=False))
        return number_statements(Program(tuple(self.records), tuple(procs)))


def generate_program(config: GenConfig) -> Program:
    """A random well-typed program; deterministic in ``config``."""
    return _Generator(config).program()


def _check_types(program: Program) -> bool:
    try:
        check_program(program)
        return True
    except ProgramTypeError:
        return False


def type_nesting(program: Program) -> int:
    """Deepest direct ``access`` nesting among declared types."""
    ts = [f.type for r in program.records for f in r.fields]
    for p in program.procedures:
        ts += [x.type for x in p.params] + [x.type for x in p.locals]
    return max((deref_nesting(t) for t in ts), default=0)


# --------------------------------------------------------------------
# Shrinking

def _remove_nth(stmts: tuple[Stmt, ...], n: int, counter: list[int],
                unwrap: bool) -> tuple[Stmt, ...]:
    out: list[Stmt] = []
    for s in stmts:
        i = counter[0]
        counter[0] += 1
        if i == n:
            if unwrap and isinstance(s, If):
                out += s.then + s.orelse
            elif unwrap and isinstance(s, While):
                out += s.body
            elif not unwrap:
                pass
            else:
                out.append(s)
            # skip numbering of the removed subtree
            counter[0] += sum(1 for _ in walk_stmts(_children(s)))
            continue
        if isinstance(s, If):
            s = dc.replace(s, then=_remove_nth(s.then, n, counter, unwrap),
                           orelse=_remove_nth(s.orelse, n, counter, unwrap))
        elif isinstance(s, While):
            s = dc.replace(s, body=_remove_nth(s.body, n, counter, unwrap))
        out.append(s)
    return tuple(out)


def _children(s: Stmt) -> tuple[Stmt, ...]:
    if isinstance(s, If):
        return s.then + s.orelse
    if isinstance(s, While):
        return s.body
    return ()


def _shrink_candidates(program: Program) -> Iterator[Program]:
    # statements first, then procedures, then record fields
    for pi, proc in enumerate(program.procedures):
        total = sum(1 for _ in walk_stmts(proc.body))
        for unwrap in (False, True):
            for n in range(total):
                body = _remove_nth(proc.body, n, [0], unwrap)
                if body != proc.body:
                    procs = list(program.procedures)
                    procs[pi] = dc.replace(proc, body=body)
                    yield dc.replace(program, procedures=tuple(procs))
    for proc in program.procedures:
        if proc.name != "Main":
            yield dc.replace(program, procedures=tuple(
                p for p in program.procedures if p is not proc))
    for ri, rec in enumerate(program.records):
        for f in rec.fields:
            recs = list(program.records)
            recs[ri] = dc.replace(rec, fields=tuple(x for x in rec.fields if x is not f))
            yield dc.replace(program, records=tuple(recs))


def shrink(program: Program, still_fails: Callable[[Program], bool],
           max_attempts: int = 3000) -> Program:
    """Greedy minimization that keeps the program well-typed and failing."""
    attempts = 0
    progress = True
    while progress and attempts < max_attempts:
        progress = False
        for cand in _shrink_candidates(program):
            attempts += 1
            if attempts > max_attempts:
                break
            cand = number_statements(cand)
            if _check_types(cand) and still_fails(cand):
                program = cand
                progress = True
                break
    return program


# --------------------------------------------------------------------
# Campaigns

@dc.dataclass
class Failure:
    seed: int
    kind: str  # crew-violation | inconsistent-policy | round-trip | order-dependence | ill-typed
    detail: str
    program: str
    config: GenConfig

    def reproducer(self) -> str:
        header = [f"-- muspark fuzz reproducer: {self.kind}",
                  f"-- {self.detail}",
                  f"-- config: {dc.replace(self.config, seed=self.seed).to_json()}"]
        return "\n".join(header) + "\n" + self.program


@dc.dataclass
class ProgramRecord:
    """What happened to one generated program."""
    seed: int
    statements: int
    accepted: bool
    outcome: str  # completed | blocked | fuel-exhausted | crew-violation | not-run
    steps: int = 0
    points: int = 0


def _outcome_name(outcome) -> str:
    return {Completed: "completed", Blocked: "blocked", FuelExhausted: "fuel-exhausted",
            CrewViolation: "crew-violation"}[type(outcome)]


@dc.dataclass
class CampaignReport:
    config: GenConfig
    count: int
    fuel: int
    unchecked: bool = False
    generated: int = 0
    accepted: int = 0
    rejected: int = 0
    completed: int = 0
    blocked: int = 0
    fuel_exhausted: int = 0
    violations: int = 0
    consistency_failures: int = 0
    roundtrip_failures: int = 0
    order_mismatches: int = 0
    points_checked: int = 0
    points_monitored: int = 0
    failures: list[Failure] = dc.field(default_factory=list)
    records: list[ProgramRecord] = dc.field(default_factory=list)

    TALLIES = ("generated", "accepted", "rejected", "completed", "blocked",
               "fuel_exhausted", "violations", "consistency_failures",
               "roundtrip_failures", "order_mismatches", "points_checked",
               "points_monitored")

    @property
    def ok(self) -> bool:
        return not self.failures

    def tallies(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in self.TALLIES}

    def summary(self) -> str:
        lines = [f"campaign seed={self.config.seed} count={self.count} fuel={self.fuel}"
                 + (" unchecked" if self.unchecked else "")]
        lines += [f"  {k:<21}{v}" for k, v in self.tallies().items()]
        lines.append("  result               " + ("ok" if self.ok else f"{len(self.failures)} failure(s)"))
        for f in self.failures:
            lines.append(f"  - seed {f.seed}: {f.kind}: {f.detail}")
        return "\n".join(lines)


def program_seed(base: int, index: int) -> int:
    return base * 1_000_003 + index


def _shuffled(seed: int):
    rng = random.Random(seed)

    def order(paths: list[Path]) -> list[Path]:
        paths = list(paths)
        rng.shuffle(paths)
        return paths
    return order


def order_sensitive(a, b) -> bool:
    """Do two checks of one program disagree on the verdict or, when both
    accept, on any recorded policy? Witness paths may legitimately differ."""
    if a.accepted != b.accepted:
        return True
    if not a.accepted:
        return False
    return a.policies.keys() != b.policies.keys() or any(
        a.policies[k] != b.policies[k] for k in a.policies)


class _Campaign:
    def __init__(self, config: GenConfig, count: int, fuel: int, unchecked: bool,
                 depth: int, shrink_failures: bool):
        self.report = CampaignReport(config, count, fuel, unchecked)
        self.depth = depth
        self.shrink_failures = shrink_failures

    def monitored(self, program: Program, envs, permissive: bool):
        res = check_program_aliasing(program, envs, permissive=permissive)
        return res, run_program(program, self.report.fuel, True, res.policies, envs=envs)

    def inconsistency(self, result) -> Optional[str]:
        seen = set()
        for key, pol in result.policies.items():
            if id(pol) in seen:
                continue
            seen.add(id(pol))
            self.report.points_checked += 1
            bad = consistency_violations(pol, self.depth)
            if bad:
                return f"at {key}: {bad[0]}"
        return None

    def fail(self, seed: int, kind: str, detail: str, program: Program,
             predicate: Optional[Callable[[Program], bool]]) -> None:
        if predicate is not None and self.shrink_failures:
            program = shrink(program, predicate)
        cfg = self.report.config
        self.report.failures.append(Failure(seed, kind, detail, pretty_print(program), cfg))

    def one(self, seed: int) -> None:
        rep = self.report
        cfg = dc.replace(rep.config, seed=seed)
        program = generate_program(cfg)
        rep.generated += 1

        if parse(pretty_print(program)) != program:
            rep.roundtrip_failures += 1
            self.fail(seed, "round-trip", "parse(print(P)) differs from P", program, None)
            return
        try:
            envs = check_program(program)
        except ProgramTypeError as e:
            self.fail(seed, "ill-typed", str(e), program, None)
            return

        result = check_program_aliasing(program, envs)
        shuffled = check_program_aliasing(program, envs, order=_shuffled(seed))
        if order_sensitive(result, shuffled):
            rep.order_mismatches += 1
            self.fail(seed, "order-dependence", "path order changed the verdict or a policy",
                      program, None)

        bad = self.inconsistency(result)
        if bad is not None:
            rep.consistency_failures += 1

            def still(p: Program) -> bool:
                return self.inconsistency(check_program_aliasing(p)) is not None
            self.fail(seed, "inconsistent-policy", bad, program, still)

        size = sum(1 for p in program.procedures for _ in walk_stmts(p.body))
        if result.accepted:
            rep.accepted += 1
        else:
            rep.rejected += 1
            if not rep.unchecked:
                rep.records.append(ProgramRecord(seed, size, False, "not-run"))
                return
        _, outcome = self.monitored(program, envs, permissive=not result.accepted)
        self.tally(outcome)
        rep.records.append(ProgramRecord(seed, size, result.accepted, _outcome_name(outcome),
                                         outcome.steps, outcome.points))
        if isinstance(outcome, CrewViolation) and result.accepted:
            def still(p: Program) -> bool:
                res = check_program_aliasing(p)
                if not res.accepted:
                    return False
                out = run_program(p, rep.fuel, True, res.policies)
                return isinstance(out, CrewViolation)
            self.fail(seed, "crew-violation", str(outcome), program, still)

    def tally(self, outcome) -> None:
        rep = self.report
        rep.points_monitored += outcome.points
        if isinstance(outcome, Completed):
            rep.completed += 1
        elif isinstance(outcome, Blocked):
            rep.blocked += 1
        elif isinstance(outcome, FuelExhausted):
            rep.fuel_exhausted += 1
        elif isinstance(outcome, CrewViolation):
            rep.violations += 1


def run_campaign(config: GenConfig, count: int, fuel: int = DEFAULT_FUEL, *,
                 unchecked: bool = False, depth: int = 6,
                 shrink_failures: bool = True) -> CampaignReport:
    """Generate ``count`` programs and run every oracle on each.

    Accepted programs are run with the CREW monitor. With ``unchecked`` the
    rejected ones are run too, against permissively computed policies; their
    violations are tallied but are not failures.
    """
    campaign = _Campaign(config, count, fuel, unchecked, depth, shrink_failures)
    for i in range(count):
        campaign.one(program_seed(config.seed, i))
    return campaign.report
