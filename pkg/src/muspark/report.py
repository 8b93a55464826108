"""Writing campaign reports to disk: tab-separated tables plus a figure."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .fuzz import CampaignReport, ProgramRecord  # noqa: E402

OUTCOMES = ("completed", "blocked", "fuel-exhausted", "crew-violation", "not-run")
PROGRAM_COLUMNS = ("seed", "statements", "accepted", "outcome", "steps", "points")


def write_tables(report: CampaignReport, outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    summary = outdir / "campaign.tsv"
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(("metric", "value"))
        w.writerow(("seed", report.config.seed))
        w.writerow(("count", report.count))
        w.writerow(("fuel", report.fuel))
        w.writerow(("unchecked", int(report.unchecked)))
        for k, v in report.tallies().items():
            w.writerow((k, v))
        w.writerow(("failures", len(report.failures)))
    programs = outdir / "programs.tsv"
    with programs.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(PROGRAM_COLUMNS)
        for r in report.records:
            w.writerow((r.seed, r.statements, int(r.accepted), r.outcome, r.steps, r.points))
    return [summary, programs]


def write_reproducers(report: CampaignReport, outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, f in enumerate(report.failures):
        path = outdir / f"repro-{i:03d}-{f.kind}-{f.seed}.mus"
        path.write_text(f.reproducer())
        written.append(path)
    return written


def _outcome_counts(records: list[ProgramRecord]) -> dict[str, tuple[int, int]]:
    counts = {o: [0, 0] for o in OUTCOMES}
    for r in records:
        counts[r.outcome][0 if r.accepted else 1] += 1
    return {k: (a, b) for k, (a, b) in counts.items()}


def write_figure(report: CampaignReport, outdir: Path) -> Path:
    """Outcome counts split by verdict, and program size by verdict."""
    outdir.mkdir(parents=True, exist_ok=True)
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    counts = _outcome_counts(report.records)
    xs = range(len(OUTCOMES))
    acc = [counts[o][0] for o in OUTCOMES]
    rej = [counts[o][1] for o in OUTCOMES]
    left.bar(xs, acc, label="accepted", color="tab:blue")
    left.bar(xs, rej, bottom=acc, label="rejected", color="tab:orange")
    left.set_xticks(list(xs), OUTCOMES, rotation=20)
    left.set_ylabel("programs")
    left.set_title("run outcomes")
    left.legend()

    sizes_acc = [r.statements for r in report.records if r.accepted]
    sizes_rej = [r.statements for r in report.records if not r.accepted]
    top = max([0] + sizes_acc + sizes_rej)
    bins = range(0, top + 2)
    right.hist([sizes_acc, sizes_rej], bins=bins, stacked=True,
               label=["accepted", "rejected"], color=["tab:blue", "tab:orange"])
    right.set_xlabel("statements per program")
    right.set_ylabel("programs")
    right.set_title("program size")
    right.legend()

    status = "ok" if report.ok else f"{len(report.failures)} failure(s)"
    fig.suptitle(f"seed {report.config.seed}, {report.count} programs, fuel {report.fuel}: {status}")
    fig.tight_layout()
    path = outdir / "campaign.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def write_report(report: CampaignReport, outdir: Path | str) -> list[Path]:
    """Write every artifact for ``report`` under ``outdir``; returns the paths."""
    outdir = Path(outdir)
    return write_tables(report, outdir) + [write_figure(report, outdir)] + \
        write_reproducers(report, outdir)
