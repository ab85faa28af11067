"""Report rendering: metrics.json, confusion CSVs, and text tables.

Machine-readable outputs are JSON and CSV; the text renderers mirror
the same numbers as aligned tables for quick reading. Two markers keep
absent information distinct: a sense with no gold instances in the
evaluation set renders "-" for F1, while a sense the model never
predicted renders "n/a" for its coherence percentage.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .analysis import AgreementReport, CoherenceReport
from .metrics import LevelReport, aggregate_mean_std

JS_LOG_BASE = 2
AGGREGATION = "mean ± sample std (n-1)"
NO_GOLD_MARKER = "-"
NEVER_PREDICTED_MARKER = "n/a"


def _aggregate_per_sense(reports: Sequence[LevelReport]) -> dict:
    out = {}
    for name, first in reports[0].per_sense.items():
        f1_values = [r.per_sense[name].f1 for r in reports]
        f1_agg = (
            None
            if any(v is None for v in f1_values)
            else aggregate_mean_std([float(v) for v in f1_values])
        )
        out[name] = {
            "f1": f1_agg,
            "gold_support": first.gold_support,
            "predicted_mean": float(
                np.mean([r.per_sense[name].predicted for r in reports])
            ),
        }
    return out


def metrics_payload(
    per_seed_reports: Sequence[Mapping[int, LevelReport]],
    summary: Mapping[int, Mapping[str, dict]],
) -> dict:
    """The metrics.json document: per-level aggregates plus provenance."""
    payload: dict = {}
    for level in sorted(per_seed_reports[0]):
        reports = [r[level] for r in per_seed_reports]
        level_summary = summary.get(level, {})
        payload[f"level{level}"] = {
            "n_instances": reports[0].n_instances,
            "js_mean": level_summary.get("js_mean"),
            "f1_weighted": level_summary.get("f1_weighted"),
            "per_sense": _aggregate_per_sense(reports),
        }
    payload["seeds"] = len(per_seed_reports)
    payload["aggregation"] = AGGREGATION
    payload["js_log_base"] = JS_LOG_BASE
    return payload


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _format_agg(agg: dict | None, digits: int) -> str:
    if agg is None:
        return NO_GOLD_MARKER
    mean = f"{agg['mean']:.{digits}f}"
    if agg.get("std_undefined"):
        return mean
    return f"{mean} ± {agg['std']:.{digits}f}"


def render_summary_table(payload: Mapping) -> str:
    """Aligned per-level overview of JS distance and weighted F1."""
    rows = [("level", "instances", "JS distance", "weighted F1")]
    for key in sorted(k for k in payload if k.startswith("level")):
        section = payload[key]
        rows.append(
            (
                key,
                str(section["n_instances"]),
                _format_agg(section["js_mean"], 4),
                _format_agg(section["f1_weighted"], 2),
            )
        )
    note = f"seeds: {payload['seeds']}  aggregation: {payload['aggregation']}"
    return _align(rows) + "\n" + note + "\n"


def render_per_sense_table(level_payload: Mapping) -> str:
    """Per-sense F1 with gold support; senses without gold render "-"."""
    rows = [("sense", "F1", "support", "predicted")]
    for name, cell in level_payload["per_sense"].items():
        rows.append(
            (
                name,
                _format_agg(cell["f1"], 2),
                str(cell["gold_support"]),
                f"{cell['predicted_mean']:.1f}",
            )
        )
    return _align(rows)


def _align(rows: Sequence[tuple]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def render_report_text(payload: Mapping) -> str:
    parts = [render_summary_table(payload)]
    for key in sorted(k for k in payload if k.startswith("level")):
        parts.append(f"\n{key} per-sense F1\n")
        parts.append(render_per_sense_table(payload[key]))
    return "".join(parts)


def write_confusion_csv(
    path: str | Path, report: LevelReport, names: Sequence[str]
) -> None:
    """Confusion counts, gold senses as rows and predictions as columns."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gold"] + list(names))
        for i, name in enumerate(names):
            writer.writerow([name] + [int(c) for c in report.confusion[i]])


def agreement_payload(report: AgreementReport) -> dict:
    payload = report.to_dict()
    payload["counts"] = {str(k): v for k, v in payload["counts"].items()}
    payload["percentages"] = {
        str(k): v for k, v in payload["percentages"].items()
    }
    return payload


def _coherence_cell_text(percentage: float | None) -> str:
    if percentage is None:
        return NEVER_PREDICTED_MARKER
    return f"{percentage:.1f}"


def write_coherence_csv(
    path: str | Path, reports: Mapping[str, CoherenceReport]
) -> None:
    """Coherence percentages: one row per sense, one column per dataset."""
    datasets = list(reports)
    if not datasets:
        raise ValueError("no coherence reports to write")
    first = reports[datasets[0]]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "sense"] + datasets)
        for level, cells in (("1", first.level1), ("2", first.level2)):
            for name in cells:
                row = [level, name]
                for dataset in datasets:
                    cell = getattr(reports[dataset], f"level{level}")[name]
                    row.append(_coherence_cell_text(cell.percentage))
                writer.writerow(row)
        overall = ["", "overall"]
        for dataset in datasets:
            overall.append(f"{reports[dataset].overall_percentage:.1f}")
        writer.writerow(overall)


def render_mass_sums(mass_sums: Mapping[int, Mapping[str, float]]) -> str:
    """Adapted sense mass summed over the corpus, one block per level."""
    parts = []
    for level in sorted(mass_sums):
        rows = [(f"level{level} sense", "mass")]
        total = 0.0
        for name, value in mass_sums[level].items():
            rows.append((name, f"{value:.1f}"))
            total += value
        rows.append(("total", f"{total:.1f}"))
        parts.append(_align(rows))
    return "\n".join(parts)


def render_majority_counts(
    counts: Mapping[str, Mapping[int, Mapping[str, int]]], level: int
) -> str:
    """Majority-label counts per split at one level, senses as rows."""
    splits = list(counts)
    senses: list[str] = []
    for split in splits:
        for name in counts[split].get(level, {}):
            if name not in senses:
                senses.append(name)
    rows = [("sense", *splits)]
    for name in senses:
        rows.append(
            (name, *(str(counts[s].get(level, {}).get(name, 0)) for s in splits))
        )
    return _align(rows)


def render_coherence_table(reports: Mapping[str, CoherenceReport]) -> str:
    buffer = io.StringIO()
    datasets = list(reports)
    rows = [("sense", *datasets)]
    first = reports[datasets[0]]
    for cells in (first.level1, first.level2):
        for name in cells:
            values = []
            for dataset in datasets:
                source = reports[dataset]
                lookup = source.level1 if name in source.level1 else source.level2
                values.append(_coherence_cell_text(lookup[name].percentage))
            rows.append((name, *values))
    rows.append(
        ("overall", *(f"{reports[d].overall_percentage:.1f}" for d in datasets))
    )
    buffer.write(_align(rows))
    return buffer.getvalue()
