"""Alias safety checking: the statement rules and the per-procedure rule.

Checking a procedure produces one access policy per sequence point (before
and after every statement). In strict mode the first failed premise stops
the procedure; in permissive mode failures are recorded and checking goes
on as if the premise held, which yields a total policy map for monitored
runs of rejected programs.
"""
from __future__ import annotations

import dataclasses as dc
from typing import Callable, NamedTuple, Optional

from .permission import (
    R, RW, W, AccessPolicy, Permission, PermError, PolicyInvariantError,
    dominates, policy_meet,
)
from .syntax import (
    NOWHERE, AddressOf, Alloc, Assign, Call, If, Mode, Path, ProcDecl,
    Program, Span, Stmt, While,
)
from .typecheck import TypeEnv, check_program

PathOrder = Callable[[list[Path]], list[Path]]

RULES = ("P-assign", "P-alloc", "P-if", "P-while", "P-call", "Proc-exit")


class SequencePoint(NamedTuple):
    proc: str
    sid: int
    when: str  # "before" | "after"

    def __str__(self) -> str:
        return f"{self.proc}#{self.sid}:{self.when}"

    @classmethod
    def parse(cls, text: str) -> "SequencePoint":
        try:
            proc, rest = text.split("#", 1)
            sid, when = rest.split(":", 1)
            if when not in ("before", "after"):
                raise ValueError(when)
            return cls(proc, int(sid), when)
        except ValueError:
            raise ValueError(f"bad sequence point {text!r}, expected Proc#N:before|after") from None


PolicyMap = dict[SequencePoint, AccessPolicy]


@dc.dataclass(frozen=True)
class Diagnostic:
    span: Span
    rule: str
    path: Optional[Path]
    required: Optional[Permission]
    actual: Optional[Permission]
    code: str
    message: str
    proc: str = ""


class AliasViolation(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


_MESSAGES = {
    "P-assign": "assignment is not alias-safe",
    "P-alloc": "allocation target is not writable",
    "P-if": "condition is not readable",
    "P-while": "loop condition is not readable",
    "P-call": "call arguments are not alias-safe",
}


@dc.dataclass
class AliasResult:
    policies: PolicyMap
    diagnostics: list[Diagnostic]

    @property
    def accepted(self) -> bool:
        return not self.diagnostics


class AliasChecker:
    def __init__(self, program: Program, envs: dict[str, TypeEnv], *,
                 permissive: bool = False, order: Optional[PathOrder] = None):
        self.program = program
        self.envs = envs
        self.permissive = permissive
        self.order = order
        self.procs = {p.name: p for p in program.procedures}
        self.policies: PolicyMap = {}
        self.diagnostics: list[Diagnostic] = []
        self._proc = ""
        self._rule = ""
        self._span = NOWHERE

    # -- failure reporting -------------------------------------------------
    def _diagnostic(self, err: Exception) -> Diagnostic:
        if isinstance(err, PermError):
            return Diagnostic(self._span, self._rule, err.path, err.required, err.actual,
                              "alias-perm", _MESSAGES.get(self._rule, "alias violation"), self._proc)
        assert isinstance(err, PolicyInvariantError)
        return Diagnostic(self._span, self._rule, err.path, None, R, "policy-invariant",
                          "inconsistent policy: block reached a read-only prefix", self._proc)

    def _on_error(self, err: Exception) -> None:
        self.diagnostics.append(self._diagnostic(err))

    def _fail(self, diag: Diagnostic) -> None:
        if self.permissive:
            self.diagnostics.append(diag)
        else:
            raise AliasViolation(diag)

    # -- statements ----------------------------------------------------------
    def check_seq(self, pol: AccessPolicy, stmts: tuple[Stmt, ...]) -> AccessPolicy:
        for s in stmts:
            self.policies[SequencePoint(self._proc, s.sid, "before")] = pol
            pol = self.check_stmt(pol, s)
            self.policies[SequencePoint(self._proc, s.sid, "after")] = pol
        return pol

    def check_stmt(self, pol: AccessPolicy, s: Stmt) -> AccessPolicy:
        """Policy after ``s``; ``pol`` itself is left untouched."""
        pol = pol.copy()
        try:
            return self._stmt(pol, s)
        except (PermError, PolicyInvariantError) as err:
            raise AliasViolation(self._diagnostic(err)) from None

    def _enter(self, rule: str, span: Span) -> None:
        self._rule, self._span = rule, span

    def _stmt(self, pol: AccessPolicy, s: Stmt) -> AccessPolicy:
        match s:
            case Assign(lhs=lhs, rhs=rhs, span=span):
                self._enter("P-assign", span)
                pol.move(rhs, self.order)
                return pol.check(lhs, W).fresh(lhs, RW).lift(lhs)
            case Alloc(lhs=lhs, span=span):
                self._enter("P-alloc", span)
                target = lhs.deref()
                return pol.check(lhs, W).fresh(target, W).cut(target).block(target)
            case If(cond=cond, then=then, orelse=orelse, span=span):
                self._enter("P-if", span)
                pol.check_expr(cond, R, self.order)
                then_pol = self.check_seq(pol, then)
                else_pol = self.check_seq(pol, orelse)
                return policy_meet(then_pol, else_pol)
            case While(cond=cond, body=body, span=span):
                self._enter("P-while", span)
                pol.check_expr(cond, R, self.order)
                after = self.check_seq(pol, body)
                witness = dominates(after, pol)
                if witness is not None:
                    self._fail(Diagnostic(
                        span, "P-while", witness, pol.get(witness), after.get(witness),
                        "loop-weakens", "loop body loses permissions needed by the next iteration",
                        self._proc))
                return pol
            case Call(span=span):
                self._enter("P-call", span)
                return self._call(pol, s)
        raise TypeError(f"not a statement: {s!r}")

    def _call(self, pol: AccessPolicy, s: Call) -> AccessPolicy:
        callee = self.procs[s.proc]
        by_mode: dict[Mode, list] = {m: [] for m in Mode}
        for param, arg in zip(callee.params, s.args):
            by_mode[param.mode].append(arg)
        # premises run on a scratch policy that is discarded afterwards
        scratch = pol.copy()
        for arg in by_mode[Mode.IN]:
            scratch.check_expr(arg, R, self.order)
            if isinstance(arg, AddressOf):
                scratch.check(arg.path, R)
            scratch.observe(arg)
        for arg in by_mode[Mode.IN_OUT]:
            scratch.check(arg.path, RW).borrow(arg.path)
        for arg in by_mode[Mode.OUT]:
            scratch.check(arg.path, W).borrow(arg.path)
        for arg in by_mode[Mode.IN_OUT] + by_mode[Mode.OUT]:
            pol.fresh(arg.path, RW).lift(arg.path)
        return pol

    # -- procedures ------------------------------------------------------------
    def initial_policy(self, proc: ProcDecl) -> AccessPolicy:
        pol = AccessPolicy(self.envs[proc.name])
        for p in proc.params:
            root = Path(p.name)
            if p.mode is Mode.IN:
                pol.fresh(root, R)
            elif p.mode is Mode.IN_OUT:
                pol.fresh(root, RW)
            else:
                pol.fresh(root, W).cut(root)
        for v in proc.locals:
            pol.fresh(Path(v.name), W).cut(Path(v.name))
        if self.permissive:
            pol.on_error = self._on_error
        return pol

    def check_procedure(self, proc: ProcDecl) -> AccessPolicy:
        """Check one procedure, recording its policies and diagnostics.

        Returns the policy at the end of the body (or at the failure point).
        """
        self._proc = proc.name
        pol = self.initial_policy(proc)
        try:
            pol = self.check_seq(pol, proc.body)
        except AliasViolation as v:
            self.diagnostics.append(v.diagnostic)
            return pol
        for p in proc.params:
            if p.mode is not Mode.IN:
                actual = pol.get(Path(p.name))
                if actual is not RW:
                    self.diagnostics.append(Diagnostic(
                        proc.span, "Proc-exit", Path(p.name), RW, actual, "exit-not-rw",
                        f"parameter '{p.name}' does not hold RW at the end of '{proc.name}'",
                        proc.name))
        return pol

    def run(self) -> AliasResult:
        for proc in self.program.procedures:
            self.check_procedure(proc)
        return AliasResult(self.policies, self.diagnostics)


def check_program_aliasing(program: Program, envs: Optional[dict[str, TypeEnv]] = None, *,
                           permissive: bool = False,
                           order: Optional[PathOrder] = None) -> AliasResult:
    """Alias-check every procedure of a well-typed program."""
    if envs is None:
        envs = check_program(program)
    return AliasChecker(program, envs, permissive=permissive, order=order).run()


def check_procedure(program: Program, name: str,
                    envs: Optional[dict[str, TypeEnv]] = None) -> AliasResult:
    if envs is None:
        envs = check_program(program)
    checker = AliasChecker(program, envs)
    checker.check_procedure(checker.procs[name])
    return AliasResult(checker.policies, checker.diagnostics)
