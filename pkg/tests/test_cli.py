import io
import json

import pytest
from conftest import CORPUS

from muspark.cli import Status, main

DIAG_KEYS = {"file", "line", "col", "code", "rule", "path", "required", "actual", "message"}


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def corpus(name):
    return CORPUS / f"{name}.mus"


def write(tmp_path, text, name="prog.mus"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_exit_code_values():
    assert [int(s) for s in Status] == [0, 1, 2, 3, 4, 5]


def test_check_accepted_is_silent():
    assert cli("check", corpus("swap")) == (0, "", "")


def test_check_rejected_reports_position_and_permissions():
    # human diagnostics go to stderr, like a compiler
    code, _, out = cli("check", corpus("p1"))
    assert code == Status.DIAGNOSTICS
    assert ":13:4: error[alias-perm]:" in out
    assert "(path B.Key.all requires W, has NO)" in out


def test_check_json_lines():
    code, out, _ = cli("check", corpus("p2"), "--format", "json")
    assert code == 1
    rows = [json.loads(line) for line in out.splitlines()]
    assert rows and all(set(r) == DIAG_KEYS for r in rows)
    assert (rows[0]["rule"], rows[0]["path"], rows[0]["required"], rows[0]["actual"]) == \
        ("P-while", "B", "RW", "W")


def test_parse_and_type_errors_are_diagnostics(tmp_path):
    code, _, out = cli("check", write(tmp_path, "procedure Main is begin X := ; end Main;"))
    assert code == 1 and "error[parse-error]" in out
    code, out, _ = cli("check", write(tmp_path, "procedure Main is begin X := 1; end Main;"),
                       "--format", "json")
    assert code == 1 and json.loads(out.splitlines()[0])["code"] == "unknown-name"


def test_run_completed_and_json():
    code, out, _ = cli("run", corpus("loop_sum"))
    assert code == 0 and out.startswith("completed")
    code, out, _ = cli("run", corpus("swap"), "--monitor", "--format", "json")
    row = json.loads(out)
    assert code == 0 and row["outcome"] == "completed" and row["monitored"] and row["points"] > 0


def test_run_blocked():
    code, out, _ = cli("run", corpus("null_deref"))
    assert code == Status.BLOCKED and "null-deref" in out and ":7:9" in out


def test_run_refuses_rejected_programs():
    code, _, out = cli("run", corpus("p1"))
    assert code == 1 and "alias-perm" in out


def test_unchecked_monitored_run_reports_crew_violation():
    code, out, _ = cli("run", corpus("unchecked_alias"), "--unchecked", "--monitor")
    assert code == Status.CREW
    assert "A.Key.all" in out and "B.Key.all" in out


def test_fuel_exhaustion(tmp_path):
    src = write(tmp_path, "procedure Main is X : Integer; begin while True loop X := 1; end loop; end Main;")
    code, out, _ = cli("run", src, "--fuel", 100)
    assert code == Status.FUEL


def test_verbose_run_traces_points(tmp_path):
    code, out, err = cli("run", corpus("assign_incr"), "--verbose")
    assert code == 0
    assert "point\tMain#1:before" in err


def test_usage_and_io_errors(tmp_path):
    assert cli("check", tmp_path / "missing.mus")[0] == Status.USAGE
    assert cli("check")[0] == Status.USAGE
    assert cli("frobnicate")[0] == Status.USAGE
    assert cli("trace", corpus("swap"), "--point", "Nope#1:after")[0] == Status.USAGE


def test_trace_point_policies():
    code, out, _ = cli("trace", corpus("swap"), "--point", "Swap#1:after", "--depth", 0)
    assert code == 0
    assert out.splitlines() == ["Temp\tRW", "X\tRW", "Y\tW"]
    _, out, _ = cli("trace", corpus("swap"), "--point", "Swap#2:after", "--depth", 0)
    assert out.splitlines() == ["Temp\tRW", "X\tW", "Y\tRW"]


def test_trace_allocation_point():
    code, out, _ = cli("trace", corpus("alloc"), "--point", "Build#1:after", "--depth", 3)
    table = dict(line.split("\t") for line in out.splitlines())
    assert code == 0
    assert (table["P"], table["P.all"], table["P.all.Key"], table["P.all.Key.all"]) == \
        ("W", "W", "W", "NO")


def test_trace_all_points_prefixes_keys():
    code, out, _ = cli("trace", corpus("swap"), "--depth", 0)
    assert code == 0
    assert all(line.split("\t")[0].count("#") == 1 for line in out.splitlines())
    assert any(line.startswith("Swap#3:after\t") for line in out.splitlines())


def test_fuzz_clean_campaign_writes_report(tmp_path):
    outdir = tmp_path / "out"
    code, out, _ = cli("fuzz", "--seed", 2, "--count", 20, "--out", outdir)
    assert code == 0 and "generated" in out
    assert (outdir / "campaign.tsv").exists() and (outdir / "campaign.png").exists()


def test_fuzz_json_summary(tmp_path):
    code, out, _ = cli("fuzz", "--count", 5, "--out", tmp_path, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["tallies"]["generated"] == 5 and data["ok"]


def test_fuzz_under_mutant_fails_with_reproducers(tmp_path):
    code, out, _ = cli("fuzz", "--count", 60, "--mutant", "cut", "--out", tmp_path)
    assert code == Status.DIAGNOSTICS
    assert list(tmp_path.glob("repro-*.mus"))


def test_fuzz_config_file_and_preset(tmp_path):
    cfg = write(tmp_path, json.dumps({"max_stmts": 2, "seed": 4}), "cfg.json")
    assert cli("fuzz", "--config", cfg, "--count", 5, "--out", tmp_path / "a")[0] == 0
    assert cli("fuzz", "--preset", "negative-control", "--unchecked", "--count", 5,
               "--out", tmp_path / "b")[0] == 0
    bad = write(tmp_path, "{not json", "bad.json")
    assert cli("fuzz", "--config", bad, "--out", tmp_path / "c")[0] == Status.USAGE


@pytest.mark.parametrize("count", ["0", "-3"])
def test_fuzz_counts(tmp_path, count):
    code = cli("fuzz", "--count", count, "--out", tmp_path)[0]
    assert code == (0 if count == "0" else Status.USAGE)
