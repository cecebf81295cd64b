"""Suite-report output: JSON, aligned text table, CSV rows, and figures.

Field names of the JSON document are pinned by docs/schemas/report.schema.json.
All float values are rounded to 4 decimal places at this presentation layer.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import SuiteReport

_DP = 4


def _r(value: float) -> float:
    return round(value, _DP)


def report_to_dict(report: SuiteReport) -> dict:
    return {
        "run_count": report.run_count,
        "groups": [
            {
                "name": g.name,
                "task_count": g.task_count,
                "sr": _r(g.sr),
                "completeness": _r(g.completeness),
            }
            for g in report.groups
        ],
        "tasks": [
            {
                "task_id": t.task_id,
                "group": t.group,
                "sr_mean": _r(t.sr_mean),
                "completeness_mean": _r(t.completeness_mean),
                "runs": [
                    {
                        "run": run_id,
                        "sr": score.sr,
                        "completeness": _r(score.completeness),
                        "error": score.error,
                    }
                    for run_id, score in t.runs
                ],
            }
            for t in report.tasks
        ],
        "notes": list(report.notes),
    }


def write_report_json(report: SuiteReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=False) + "\n",
        encoding="utf-8",
    )


def render_table(report: SuiteReport) -> str:
    """Aligned text table of group means followed by per-task rows."""
    lines = [f"runs: {report.run_count}", ""]
    headers = ("group", "tasks", "SR", "completeness")
    rows = [
        (g.name, str(g.task_count), f"{g.sr:.4f}", f"{g.completeness:.4f}")
        for g in report.groups
    ]
    lines += _aligned(headers, rows)
    lines.append("")
    headers = ("task", "group", "SR", "completeness", "error")
    rows = []
    for t in report.tasks:
        errors = sorted({s.error for _, s in t.runs if s.error})
        rows.append(
            (
                t.task_id,
                t.group or "ungrouped",
                f"{t.sr_mean:.4f}",
                f"{t.completeness_mean:.4f}",
                errors[0] if errors else "",
            )
        )
    lines += _aligned(headers, rows)
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def _aligned(headers, rows) -> list[str]:
    table = [tuple(headers)] + [tuple(r) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    out = []
    for idx, row in enumerate(table):
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if idx == 0:
            out.append("  ".join("-" * w for w in widths))
    return out


def write_report_csv(report: SuiteReport, path: str | Path) -> None:
    """Per-task delimited rows alongside the JSON document."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "group", "run_count", "sr_mean", "completeness_mean", "errors"])
        for t in report.tasks:
            errors = "; ".join(sorted({s.error for _, s in t.runs if s.error}))
            writer.writerow(
                [
                    t.task_id,
                    t.group or "ungrouped",
                    len(t.runs),
                    f"{t.sr_mean:.4f}",
                    f"{t.completeness_mean:.4f}",
                    errors,
                ]
            )


def write_report_figures(report: SuiteReport, outdir: str | Path) -> list[Path]:
    """Render bar charts of group means and per-task completeness to PNG."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if report.groups:
        names = [g.name for g in report.groups]
        xs = range(len(names))
        fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(names) + 2), 3.2))
        width = 0.38
        ax.bar([x - width / 2 for x in xs], [g.sr for g in report.groups],
               width=width, label="SR", color="#2c7fb8")
        ax.bar([x + width / 2 for x in xs], [g.completeness for g in report.groups],
               width=width, label="completeness", color="#7fcdbb")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(names, rotation=20, ha="right")
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("mean over tasks")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = outdir / "group_metrics.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if report.tasks:
        tasks = list(report.tasks)
        fig, ax = plt.subplots(figsize=(6.0, max(2.5, 0.22 * len(tasks) + 1)))
        ys = range(len(tasks))
        ax.barh(list(ys), [t.completeness_mean for t in tasks], color="#41b6c4")
        ax.set_yticks(list(ys))
        ax.set_yticklabels([t.task_id for t in tasks], fontsize=6)
        ax.invert_yaxis()
        ax.set_xlim(0.0, 1.0)
        ax.set_xlabel("completeness")
        fig.tight_layout()
        path = outdir / "task_completeness.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
