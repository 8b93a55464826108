"""The ``muspark`` command: check, run, trace and fuzz."""
from __future__ import annotations

import argparse
import enum
import json
import sys
from pathlib import Path
from typing import Optional, TextIO

from . import fuzz
from .alias import AliasResult, Diagnostic, SequencePoint, check_program_aliasing
from .interp import (
    DEFAULT_FUEL, Blocked, Completed, CrewViolation, FuelExhausted, Interpreter,
    format_value,
)
from .mutants import MUTANTS, mutant
from .parser import ParseError, parse
from .report import write_report
from .syntax import Program, Span
from .typecheck import ProgramTypeError, TypeEnv, check_program


class Status(enum.IntEnum):
    OK = 0
    DIAGNOSTICS = 1
    BLOCKED = 2
    CREW = 3
    USAGE = 4
    FUEL = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


# --------------------------------------------------------------------
# Diagnostics

def _record(file: str, span: Span, code: str, message: str, rule=None,
            path=None, required=None, actual=None) -> dict:
    return {"file": file, "line": span.line, "col": span.col, "code": code,
            "rule": rule, "path": None if path is None else str(path),
            "required": None if required is None else str(required),
            "actual": None if actual is None else str(actual), "message": message}


def _alias_record(file: str, d: Diagnostic) -> dict:
    return _record(file, d.span, d.code, d.message, d.rule, d.path, d.required, d.actual)


def format_human(rec: dict) -> str:
    text = f"{rec['file']}:{rec['line']}:{rec['col']}: error[{rec['code']}]: {rec['message']}"
    if rec["path"] is not None and rec["required"] is not None:
        text += f" (path {rec['path']} requires {rec['required']}, has {rec['actual']})"
    return text


class _Out:
    def __init__(self, fmt: str, out: TextIO, err: TextIO):
        self.fmt, self.out, self.err = fmt, out, err

    def diagnostics(self, records: list[dict]) -> None:
        for rec in records:
            if self.fmt == "json":
                print(json.dumps(rec), file=self.out)
            else:
                print(format_human(rec), file=self.err)

    def result(self, human: str, obj: dict) -> None:
        if self.fmt == "json":
            print(json.dumps(obj), file=self.out)
        elif human:
            print(human, file=self.out)


class _Failed(Exception):
    def __init__(self, status: Status):
        self.status = status


def _load(args, out: _Out) -> tuple[Program, dict[str, TypeEnv]]:
    file = args.file
    try:
        source = Path(file).read_text()
    except OSError as e:
        print(f"muspark: cannot read {file}: {e.strerror or e}", file=out.err)
        raise _Failed(Status.USAGE)
    try:
        program = parse(source)
    except ParseError as e:
        out.diagnostics([_record(file, e.span, e.code, str(e))])
        raise _Failed(Status.DIAGNOSTICS)
    try:
        envs = check_program(program)
    except ProgramTypeError as e:
        out.diagnostics([_record(file, x.span, x.code, str(x)) for x in e.errors])
        raise _Failed(Status.DIAGNOSTICS)
    return program, envs


def _alias(args, program, envs, out: _Out) -> AliasResult:
    result = check_program_aliasing(program, envs)
    if not result.accepted:
        out.diagnostics([_alias_record(args.file, d) for d in result.diagnostics])
        raise _Failed(Status.DIAGNOSTICS)
    return result


# --------------------------------------------------------------------
# Commands

def cmd_check(args, out: _Out) -> Status:
    program, envs = _load(args, out)
    _alias(args, program, envs, out)
    return Status.OK


def cmd_run(args, out: _Out) -> Status:
    program, envs = _load(args, out)
    if args.unchecked:
        result = check_program_aliasing(program, envs, permissive=True)
    else:
        result = _alias(args, program, envs, out)
    def trace(line: str) -> None:
        print(f"point\t{line}", file=out.err)
    interp = Interpreter(program, envs, fuel=args.fuel,
                         policies=result.policies if args.monitor else None,
                         trap_overflow=args.trap_overflow,
                         trace=trace if args.verbose else None)
    outcome = interp.run()
    obj = {"file": args.file, "steps": outcome.steps, "monitored": bool(args.monitor),
           "points": outcome.points}
    match outcome:
        case Completed(store=store, binding=binding):
            values = {k: format_value(store.read(a)) for k, a in binding.items()}
            obj |= {"outcome": "completed", "locals": values}
            human = f"completed in {outcome.steps} steps"
            if args.verbose:
                human += "".join(f"\n  {k} = {v}" for k, v in values.items())
            out.result(human, obj)
            return Status.OK
        case Blocked(reason=reason, span=span):
            obj |= {"outcome": "blocked", "reason": reason, "line": span.line, "col": span.col}
            out.result(f"blocked: {reason} at {args.file}:{span}", obj)
            return Status.BLOCKED
        case CrewViolation():
            obj |= {"outcome": "crew-violation", "point": str(outcome.point),
                    "p": str(outcome.p), "q": str(outcome.q),
                    "perm_p": str(outcome.perm_p), "perm_q": str(outcome.perm_q),
                    "address": str(outcome.address)}
            out.result(str(outcome), obj)
            return Status.CREW
        case FuelExhausted(reason=reason):
            obj |= {"outcome": "fuel-exhausted", "reason": reason}
            out.result(f"fuel exhausted ({reason}) after {outcome.steps} steps", obj)
            return Status.FUEL
    raise AssertionError(outcome)


def _point_order(program: Program):
    rank = {p.name: i for i, p in enumerate(program.procedures)}
    return lambda k: (rank[k.proc], k.sid, k.when != "before")


def cmd_trace(args, out: _Out) -> Status:
    program, envs = _load(args, out)
    result = _alias(args, program, envs, out)
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    if args.point is not None:
        try:
            key = SequencePoint.parse(args.point)
        except ValueError as e:
            raise UsageError(str(e))
        if key not in result.policies:
            raise UsageError(f"no sequence point {args.point}")
        keys = [key]
    else:
        keys = sorted(result.policies, key=_point_order(program))
    for key in keys:
        rows = sorted(((str(p), str(perm)) for p, perm in result.policies[key].items(args.depth)))
        for path, perm in rows:
            prefix = "" if args.point is not None else f"{key}\t"
            out.result(f"{prefix}{path}\t{perm}", {"point": str(key), "path": path, "perm": perm})
    return Status.OK


PRESETS = {"default": fuzz.GenConfig(), "negative-control": fuzz.NEGATIVE_CONTROL,
           "mutation-probe": fuzz.MUTATION_PROBE}


def cmd_fuzz(args, out: _Out) -> Status:
    if args.count < 0 or args.fuel < 0:
        raise UsageError("--count and --fuel must be >= 0")
    if args.config is not None:
        try:
            config = fuzz.GenConfig.from_json(Path(args.config).read_text())
        except OSError as e:
            print(f"muspark: cannot read {args.config}: {e.strerror or e}", file=out.err)
            return Status.USAGE
        except (ValueError, TypeError) as e:
            raise UsageError(f"bad config {args.config}: {e}")
    else:
        config = PRESETS[args.preset]
    config = fuzz.dc.replace(config, seed=args.seed)
    if args.mutant is not None:
        with mutant(args.mutant):
            report = fuzz.run_campaign(config, args.count, args.fuel, unchecked=args.unchecked,
                                       shrink_failures=not args.no_shrink)
    else:
        report = fuzz.run_campaign(config, args.count, args.fuel, unchecked=args.unchecked,
                                   shrink_failures=not args.no_shrink)
    written = write_report(report, args.out)
    obj = {"tallies": report.tallies(), "ok": report.ok,
           "failures": [{"seed": f.seed, "kind": f.kind, "detail": f.detail}
                        for f in report.failures],
           "files": [str(p) for p in written]}
    human = report.summary() + "".join(f"\nwrote {p}" for p in written)
    out.result(human, obj)
    return Status.OK if report.ok else Status.DIAGNOSTICS


# --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="muspark", description="Alias-safety checker and interpreter for muSPARK.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("human", "json"), default="human")
        return p

    p = common(sub.add_parser("check", help="type and alias check a program"))
    p.add_argument("file")

    p = common(sub.add_parser("run", help="execute Main"))
    p.add_argument("file")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--monitor", action="store_true", help="check CREW at every sequence point")
    p.add_argument("--trap-overflow", action="store_true", help="block on integer overflow")
    p.add_argument("--unchecked", action="store_true",
                   help="skip alias checking; monitoring uses permissively computed policies")
    p.add_argument("--verbose", action="store_true")

    p = common(sub.add_parser("trace", help="print access policies at sequence points"))
    p.add_argument("file")
    p.add_argument("--point", help="Proc#N:before|after (default: every point)")
    p.add_argument("--depth", type=int, default=4)

    p = common(sub.add_parser("fuzz", help="run a random differential campaign"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--config", help="JSON file with generator settings")
    p.add_argument("--preset", choices=tuple(PRESETS), default="default")
    p.add_argument("--out", default="fuzz-out", help="report directory (default: fuzz-out)")
    p.add_argument("--mutant", choices=tuple(MUTANTS), help="weaken one transformer")
    p.add_argument("--unchecked", action="store_true",
                   help="also run rejected programs (negative control)")
    p.add_argument("--no-shrink", action="store_true")
    return parser


COMMANDS = {"check": cmd_check, "run": cmd_run, "trace": cmd_trace, "fuzz": cmd_fuzz}


def main(argv: Optional[list[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return int(COMMANDS[args.command](args, _Out(args.format, out, err)))
    except UsageError as e:
        print(f"muspark: {e}", file=err)
        return int(Status.USAGE)
    except _Failed as f:
        return int(f.status)


if __name__ == "__main__":
    sys.exit(main())
