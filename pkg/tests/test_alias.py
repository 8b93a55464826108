import random
import re

import pytest
from conftest import LIST_DECL, corpus_program, scope

from muspark.alias import (
    AliasChecker, AliasViolation, SequencePoint, check_procedure,
    check_program_aliasing,
)
from muspark.fuzz import GenConfig, generate_program
from muspark.parser import parse
from muspark.permission import NO, R, RW, W, consistency_violations
from muspark.printer import pretty_print
from muspark.syntax import Path, While, walk_stmts
from muspark.typecheck import check_program

SWAP = LIST_DECL + """
procedure Swap (X, Y : in out List) is
   Temp : List := Y;
begin
   Y := X;
   X := Temp;
end Swap;
"""
MAIN = "\nprocedure Main is begin end Main;\n"


def P(text):
    return Path.parse(text)


def roots(policy, *names):
    return tuple(policy.get(Path(n)) for n in names)


def only(result):
    assert len(result.diagnostics) == 1, result.diagnostics
    return result.diagnostics[0]


def test_p1_rejected_at_third_assignment():
    d = only(check_program_aliasing(corpus_program("p1")))
    assert (d.rule, d.path, d.required, d.actual) == ("P-assign", P("B.Key.all"), W, NO)
    assert (d.span.line, d.span.col) == (13, 4)
    assert d.proc == "P1" and d.code == "alias-perm"


def test_p1_policies_before_failure():
    result = check_program_aliasing(corpus_program("p1"))
    after_move = result.policies[SequencePoint("P1", 1, "after")]
    assert after_move.get(P("B.Flag")) is RW
    assert roots(after_move, "A", "B") == (RW, W)
    assert after_move.get(P("B.Key.all")) is NO


def test_p2_rejected_by_loop_with_witness_b():
    d = only(check_program_aliasing(corpus_program("p2")))
    assert (d.rule, d.path, d.code) == ("P-while", P("B"), "loop-weakens")
    assert (d.required, d.actual) == (RW, W)


def test_swap_root_permissions_at_each_point():
    result = check_procedure(parse(SWAP + MAIN), "Swap")
    assert result.accepted
    pts = result.policies
    names = ("X", "Y", "Temp")
    assert roots(pts[SequencePoint("Swap", 1, "before")], *names) == (RW, RW, W)
    assert roots(pts[SequencePoint("Swap", 1, "after")], *names) == (RW, W, RW)
    assert roots(pts[SequencePoint("Swap", 2, "after")], *names) == (W, RW, RW)
    assert roots(pts[SequencePoint("Swap", 3, "after")], *names) == (RW, RW, W)


@pytest.mark.parametrize("name", ["swap", "assign_incr", "alloc", "move_next", "flag_access",
                                  "loop_sum", "list", "null_deref"])
def test_accepted_corpus(name):
    result = check_program_aliasing(corpus_program(name))
    assert result.accepted, result.diagnostics
    for key, pol in result.policies.items():
        assert consistency_violations(pol) == [], key


def test_self_link_rejected_at_lhs():
    d = only(check_program_aliasing(corpus_program("cycle")))
    assert (d.rule, d.path, d.required, d.actual) == ("P-assign", P("A.Next"), W, NO)


def test_allocation_policy():
    program = parse(LIST_DECL + "procedure Main is P : access List; begin P := new List; end Main;")
    pol = check_program_aliasing(program).policies[SequencePoint("Main", 1, "after")]
    expect = {"P": W, "P.all": W, "P.all.Flag": W, "P.all.Key": W, "P.all.Next": W,
              "P.all.Key.all": NO, "P.all.Next.all": NO, "P.all.Next.all.Flag": NO}
    assert {k: pol.get(P(k)) for k in expect} == expect


def test_assignment_through_fresh_memory_regains_ownership():
    program = corpus_program("alloc")
    pol = check_program_aliasing(program).policies[SequencePoint("Build", 4, "after")]
    assert pol.get(P("P")) is RW


def test_empty_sequence_and_empty_main():
    result = check_program_aliasing(parse("procedure Main is begin end Main;"))
    assert result.accepted and result.policies == {}
    program = parse(SWAP + MAIN)
    checker = AliasChecker(program, check_program(program))
    checker._proc = "Swap"
    pol = checker.initial_policy(program.procedure("Swap"))
    assert checker.check_seq(pol, ()) is pol


def test_diagnostics_only_for_the_bad_procedure():
    program = parse(SWAP + """
procedure P1 (A, B : in out List) is
begin
   A := B;
   B.Flag := True;
   B.Key.all := 42;
end P1;
""" + MAIN)
    result = check_program_aliasing(program)
    assert [d.proc for d in result.diagnostics] == ["P1"]


def test_same_path_lent_twice():
    d = only(check_program_aliasing(corpus_program("call_overlap")))
    assert (d.rule, d.path, d.required, d.actual) == ("P-call", P("Z.Left"), RW, NO)


def test_in_and_in_out_on_the_same_path_rejected():
    program = parse(LIST_DECL + """
procedure Use (A : in List; B : in out List) is begin end Use;
procedure Main is X : List; begin X.Flag := True; X.Key := null; X.Next := null; Use (X, X); end Main;
""")
    d = only(check_program_aliasing(program))
    assert d.rule == "P-call" and d.path == P("X")


def test_shared_in_arguments_accepted():
    program = parse(LIST_DECL + """
procedure Look (A, B : in List) is begin end Look;
procedure Main is X : List; begin X.Flag := True; X.Key := null; X.Next := null; Look (X, X); end Main;
""")
    result = check_program_aliasing(program)
    assert result.accepted
    # permissions come back after the call
    assert result.policies[SequencePoint("Main", 4, "after")].get(P("X")) is RW


def test_out_argument_needs_only_write():
    program = parse(LIST_DECL + """
procedure Init (A : out List) is begin A.Flag := True; A.Key := null; A.Next := null; end Init;
procedure Main is X : List; begin Init (X); X.Flag := False; end Main;
""")
    result = check_program_aliasing(program)
    assert result.accepted
    assert result.policies[SequencePoint("Main", 1, "before")].get(P("X")) is W
    assert result.policies[SequencePoint("Main", 1, "after")].get(P("X")) is RW


def test_address_of_in_argument_requires_read():
    program = parse("""
procedure Peek (P : in access Integer) is begin end Peek;
procedure Main is N : Integer; begin Peek (N'Access); end Main;
""")
    d = only(check_program_aliasing(program))
    assert (d.rule, d.path, d.required, d.actual) == ("P-call", P("N"), R, W)


def test_out_parameter_must_be_assigned():
    program = parse("procedure Q (N : out Integer) is begin end Q;" + MAIN)
    d = only(check_program_aliasing(program))
    assert (d.rule, d.code, d.path, d.actual) == ("Proc-exit", "exit-not-rw", P("N"), W)


def test_moved_in_out_parameter_must_be_restored():
    program = parse(LIST_DECL + """
procedure Steal (A, B : in out List) is begin A := B; end Steal;
procedure Give (A, B : in out List) is begin A := B; B := A; end Give;
""" + MAIN)
    result = check_program_aliasing(program)
    assert [(d.proc, d.path) for d in result.diagnostics] == [("Steal", P("B")), ("Give", P("A"))]


def test_conditional_merges_branches():
    program = parse(LIST_DECL + """
procedure Main is A, B : List; C : Boolean;
begin
   A.Flag := True; A.Key := null; A.Next := null; C := True;
   if C then B := A; else B.Flag := C; end if;
end Main;
""")
    result = check_program_aliasing(program)
    assert result.accepted
    after_if = result.policies[SequencePoint("Main", 5, "after")]
    assert after_if.get(P("A")) is W
    assert after_if.get(P("A.Key.all")) is NO


def test_condition_must_be_readable():
    program = parse("procedure Main is C : Boolean; begin if C then C := True; end if; end Main;")
    d = only(check_program_aliasing(program))
    assert (d.rule, d.path, d.actual) == ("P-if", P("C"), W)


def test_check_stmt_leaves_input_untouched():
    program = corpus_program("p1")
    env = scope(LIST_DECL, "procedure P1 (A, B : in out List) is")[1]
    checker = AliasChecker(program, {"P1": env})
    pol = checker.initial_policy(program.procedure("P1"))
    snapshot = pol.copy()
    body = program.procedure("P1").body
    after = checker.check_stmt(pol, body[0])
    assert pol == snapshot and after != snapshot
    with pytest.raises(AliasViolation):
        checker.check_stmt(checker.check_stmt(after, body[1]), body[2])


def test_permissive_mode_records_everything():
    result = check_program_aliasing(corpus_program("unchecked_alias"), permissive=True)
    assert not result.accepted
    # checking went on past the bad write and also reached the exit check
    assert [(d.rule, d.path) for d in result.diagnostics] == [
        ("P-assign", P("B.Key.all")), ("Proc-exit", P("B"))]
    assert SequencePoint("P1", 3, "after") in result.policies
    assert SequencePoint("Main", 9, "after") in result.policies


@pytest.mark.parametrize("name", ["p1", "p2", "swap", "cycle", "call_overlap", "loop_sum",
                                  "move_next", "flag_access"])
def test_path_order_does_not_matter(name):
    program = corpus_program(name)
    base = check_program_aliasing(program)
    for seed in range(5):
        rng = random.Random(seed)
        shuffled = check_program_aliasing(program, order=lambda ps: rng.sample(ps, len(ps)))
        assert shuffled.accepted == base.accepted
        assert shuffled.policies == base.policies


def _loops(stmts):
    for s in walk_stmts(stmts):
        if isinstance(s, While):
            yield s


def test_loop_body_is_stable_from_the_loop_exit_policy():
    checked = 0
    for seed in range(150):
        program = generate_program(GenConfig(seed=seed, loop_prob=0.4))
        envs = check_program(program)
        result = check_program_aliasing(program, envs)
        if not result.accepted:
            continue
        checker = AliasChecker(program, envs)
        for proc in program.procedures:
            checker._proc = proc.name
            for loop in _loops(proc.body):
                after = result.policies[SequencePoint(proc.name, loop.sid, "after")]
                checker.check_seq(after.copy(), loop.body)  # must not raise
                checked += 1
    assert checked > 20


def _rename_main_locals(program, suffix):
    names = {v.name: v.name + suffix for v in program.procedure("Main").locals}
    if not names:
        return program
    text = pretty_print(program)
    cut = text.index("procedure Main")
    body = re.sub(r"\b(" + "|".join(map(re.escape, names)) + r")\b",
                  lambda m: names[m.group(1)], text[cut:])
    return parse(text[:cut] + body)


def test_renaming_locals_keeps_the_verdict():
    renamed_any = 0
    for seed in range(60):
        program = generate_program(GenConfig(seed=seed, guided=seed % 2 == 0))
        renamed = _rename_main_locals(program, "_R")
        renamed_any += renamed != program
        assert check_program_aliasing(renamed).accepted == \
            check_program_aliasing(program).accepted, seed
    assert renamed_any > 10


def test_lhs_is_checked_after_the_rhs_moves():
    # moving P.all.Next blocks P down to W, which is exactly what the write needs
    program = parse(LIST_DECL + """
procedure Advance (P : in out access List) is begin P := P.all.Next; end Advance;
""" + MAIN)
    result = check_program_aliasing(program)
    assert result.accepted
    assert result.policies[SequencePoint("Advance", 1, "after")].get(P("P.all.Next.all")) is RW
