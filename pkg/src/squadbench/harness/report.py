"""Report rendering: delimited records, aligned text tables, and figures.

The ``report`` CLI path consumes evaluation output (or raw episode result
logs), writes one machine-readable CSV row per task x regime x agent,
prints aligned tables, and renders summary figures (success rate and
scaled reward per task) as PNG files next to the delimited output.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from squadbench.harness.evaluation import EvaluationReport, TaskRow
from squadbench.metrics import round_half_up

CSV_COLUMNS = [
    "task_id", "task_name", "family", "regime", "agent_id", "trials",
    "victories", "sr_pct", "steps_mean", "steps_sd", "r_scaled_mean",
    "r_scaled_sd", "family_score_mean", "family_score_sd",
]


def _fmt(value, digits: int = 1) -> str:
    if value is None:
        return "--"
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, float):
        return f"{round_half_up(value, digits):.{digits}f}"
    return str(value)


def _steps_cell(row: TaskRow) -> str:
    if row.victories == 0:
        return "inf"
    return f"{_fmt(row.steps_mean)}+-{_fmt(row.steps_sd)}"


def text_table(report: EvaluationReport) -> str:
    """Aligned per-task table with SR / steps / reward / family score."""
    header = [
        "task", "name", "family", "SR%", "steps", "R_scaled", "family_score",
    ]
    lines = [
        f"agent={report.agent_id} regime={report.regime} trials={report.trials} seed_base={report.seed_base}"
    ]
    rows = [header]
    for row in report.rows:
        rows.append(
            [
                str(row.task_id),
                row.task_name,
                row.family,
                _fmt(row.sr_pct),
                _steps_cell(row),
                f"{_fmt(row.r_scaled_mean)}+-{_fmt(row.r_scaled_sd)}",
                (
                    f"{_fmt(row.family_score_mean)}+-{_fmt(row.family_score_sd)}"
                    if row.family_score_mean is not None
                    else "--"
                ),
            ]
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)))
    if report.ask is not None:
        a = report.ask
        lines.append(
            "ask: AR={}% Effect={} Efficiency={}{}".format(
                _fmt(a.ar), _fmt(a.effect), _fmt(a.efficiency),
                "" if a.effect_defined else " (no asked episode had a predecessor)",
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(reports: list[EvaluationReport], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for report in reports:
            for row in report.rows:
                record = {k: row.to_dict().get(k) for k in CSV_COLUMNS}
                writer.writerow(record)


def write_json(reports: list[EvaluationReport], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for report in reports:
            fh.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")


def render_figures(reports: list[EvaluationReport], out_dir: Path) -> list[Path]:
    """Bar charts of SR% and mean scaled reward per task, one series per
    agent/regime pair."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    series = []
    for report in reports:
        label = f"{report.agent_id} ({report.regime})"
        tasks = [f"{r.task_id}:{r.task_name}" for r in report.rows]
        series.append((label, tasks, report.rows))
    if not series:
        return written

    task_labels = series[0][1]
    x = range(len(task_labels))
    width = max(0.1, 0.8 / len(series))

    for metric, fname, ylabel in (
        (lambda r: r.sr_pct, "sr_by_task.png", "success rate (%)"),
        (lambda r: r.r_scaled_mean, "reward_by_task.png", "mean scaled reward"),
    ):
        fig, ax = plt.subplots(figsize=(10, 4.5))
        for i, (label, _, rows) in enumerate(series):
            values = [metric(r) for r in rows]
            ax.bar([xi + i * width for xi in x], values, width=width, label=label)
        ax.set_xticks([xi + width * (len(series) - 1) / 2 for xi in x])
        ax.set_xticklabels(task_labels, rotation=30, ha="right")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / fname
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def emit_report(
    reports: list[EvaluationReport], out_dir: str | Path, figures: bool = True
) -> dict:
    """Write the delimited records, the JSONL report, the text tables, and
    (optionally) the figures; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict = {}

    csv_path = out / "report.csv"
    write_csv(reports, csv_path)
    paths["csv"] = csv_path

    json_path = out / "report.jsonl"
    write_json(reports, json_path)
    paths["jsonl"] = json_path

    text = "\n".join(text_table(r) for r in reports)
    text_path = out / "report.txt"
    text_path.write_text(text, encoding="utf-8")
    paths["text"] = text_path

    if figures:
        paths["figures"] = render_figures(reports, out)
    return paths
