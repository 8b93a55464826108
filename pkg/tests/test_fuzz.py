import dataclasses as dc
import json

import pytest

from muspark.alias import check_program_aliasing
from muspark.fuzz import (
    MUTATION_PROBE, NEGATIVE_CONTROL, CampaignReport, GenConfig, generate_program,
    program_seed, run_campaign, shrink, type_nesting,
)
from muspark.mutants import MUTANTS, mutant
from muspark.parser import parse
from muspark.printer import pretty_print
from muspark.report import PROGRAM_COLUMNS, write_report
from muspark.syntax import Assign, walk_stmts
from muspark.typecheck import check_program


def size(program):
    return sum(1 for p in program.procedures for _ in walk_stmts(p.body))


def test_generation_is_deterministic():
    for seed in range(20):
        assert generate_program(GenConfig(seed=seed)) == generate_program(GenConfig(seed=seed))
    assert len({pretty_print(generate_program(GenConfig(seed=s))) for s in range(20)}) > 15


def test_zero_statements_gives_empty_bodies():
    for seed in range(20):
        program = generate_program(GenConfig(seed=seed, max_stmts=0))
        assert all(p.body == () for p in program.procedures)
        assert program.procedures[-1].name == "Main"


def test_nesting_bound_is_respected():
    for seed in range(50):
        program = generate_program(GenConfig(seed=seed, max_nesting=1))
        assert type_nesting(program) <= 1


@pytest.mark.slow
def test_ten_thousand_seeds_type_check():
    for seed in range(10_000):
        check_program(generate_program(GenConfig(seed=seed, guided=False)))


def test_guided_generation_is_mostly_accepted():
    accepted = sum(check_program_aliasing(generate_program(GenConfig(seed=s))).accepted
                   for s in range(100))
    assert accepted >= 70


def test_config_validation_and_json():
    with pytest.raises(ValueError):
        GenConfig(max_stmts=-1)
    cfg = GenConfig(seed=9, loop_prob=0.3, guided=False)
    assert GenConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(cfg.to_json())["seed"] == 9
    with pytest.raises(TypeError):
        GenConfig.from_json('{"no_such_knob": 1}')


def test_program_seed_is_injective_over_a_campaign():
    assert len({program_seed(b, i) for b in range(3) for i in range(1000)}) == 3000


def test_shrink_keeps_types_and_failure():
    program = next(p for p in (generate_program(GenConfig(seed=s, max_stmts=8))
                               for s in range(50)) if size(p) >= 6)

    def has_assignment(p):
        return any(isinstance(s, Assign) for q in p.procedures for s in walk_stmts(q.body))

    small = shrink(program, has_assignment)
    check_program(small)
    assert has_assignment(small)
    assert size(small) <= 1
    assert len(small.procedures) == 1


def test_shrink_returns_input_when_nothing_smaller_fails():
    program = generate_program(GenConfig(seed=3))
    assert shrink(program, lambda p: p == program) == program


def test_campaign_is_deterministic_and_clean():
    a = run_campaign(GenConfig(seed=5), 40)
    b = run_campaign(GenConfig(seed=5), 40)
    assert a.tallies() == b.tallies() and a.ok
    assert a.generated == 40 == a.accepted + a.rejected
    assert a.completed + a.blocked + a.fuel_exhausted + a.violations == a.accepted
    assert a.points_monitored > 0 and a.points_checked > 0
    assert [r.seed for r in a.records] == [program_seed(5, i) for i in range(40)]


def test_empty_campaign():
    rep = run_campaign(GenConfig(), 0)
    assert rep.ok and rep.generated == 0
    assert "result               ok" in rep.summary()


def test_unchecked_campaign_tallies_violations_without_failing():
    rep = run_campaign(NEGATIVE_CONTROL, 150, unchecked=True)
    assert rep.ok
    assert rep.violations > 0
    assert rep.completed + rep.blocked + rep.fuel_exhausted + rep.violations == rep.generated


@pytest.mark.parametrize("name, config", [("cut", GenConfig()), ("block", GenConfig()),
                                          ("borrow", MUTATION_PROBE)])
def test_mutants_are_detected(name, config):
    with mutant(name):
        rep = run_campaign(config, 200, shrink_failures=False)
    assert not rep.ok, name


def test_mutant_context_restores_transformer():
    from muspark.permission import AccessPolicy
    before = {attr: getattr(AccessPolicy, attr) for attr, _ in MUTANTS.values()}
    with mutant("cut"):
        assert AccessPolicy.cut is not before["cut"]
    assert {attr: getattr(AccessPolicy, attr) for attr in before} == before
    with pytest.raises(ValueError):
        with mutant("nope"):
            pass


def test_reproducers_parse_and_still_fail():
    with mutant("cut"):
        rep = run_campaign(GenConfig(), 60)
        assert rep.failures
        for f in rep.failures:
            text = f.reproducer()
            assert text.startswith("-- muspark fuzz reproducer: " + f.kind)
            program = parse(text)
            check_program(program)
            header = text.splitlines()[2].removeprefix("-- config: ")
            assert GenConfig.from_json(header).seed == f.seed


def test_report_files(tmp_path):
    rep = run_campaign(GenConfig(seed=1), 25)
    written = write_report(rep, tmp_path)
    names = {p.name for p in written}
    assert {"campaign.tsv", "programs.tsv", "campaign.png"} <= names
    rows = (tmp_path / "programs.tsv").read_text().splitlines()
    assert tuple(rows[0].split("\t")) == PROGRAM_COLUMNS and len(rows) == 26
    metrics = dict(line.split("\t") for line in (tmp_path / "campaign.tsv").read_text().splitlines()[1:])
    assert metrics["generated"] == "25"
    assert (tmp_path / "campaign.png").read_bytes()[:4] == b"\x89PNG"


def test_report_dataclass_defaults():
    rep = CampaignReport(GenConfig(), 0, 10)
    assert rep.ok and set(rep.tallies()) == set(CampaignReport.TALLIES)
    assert dc.replace(rep, violations=1).tallies()["violations"] == 1
