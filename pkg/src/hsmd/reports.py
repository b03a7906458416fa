"""CSV/JSON report layouts and the metric-fixtures reader.

Column orders:

* ``overall.csv``    method, RC, Re, Sp, FPR, FNR, WCR, CCR, F1, Pr
* ``categories.csv`` category, method, videos, TP, TN, FP, FN, Re..F1 (mean of
  videos), pooled_Re..pooled_F1 (pooled confusion)
* ``videos.csv``     category, video, frames, scored_frames, TP, TN, FP, FN, Re..F1, mean_ms
* ``ranking.csv``    category, method, R, rank_Re..rank_F1 (best first per category)

Undefined metrics are written as empty CSV cells and JSON ``null``.

A fixtures file is a CSV with a ``method`` column, the eight metric columns in
any order and an optional ``category`` column; other columns are ignored.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .metrics import METRIC_NAMES, MetricSet, RankTable, rank_across_categories, rank_methods

OVERALL_COLUMNS = ("method", "RC", "Re", "Sp", "FPR", "FNR", "WCR", "CCR", "F1", "Pr")
CATEGORY_COLUMNS = (
    ("category", "method", "videos", "TP", "TN", "FP", "FN")
    + METRIC_NAMES
    + tuple(f"pooled_{m}" for m in METRIC_NAMES)
)
VIDEO_COLUMNS = (
    ("category", "video", "frames", "scored_frames", "TP", "TN", "FP", "FN") + METRIC_NAMES + ("mean_ms",)
)
RANKING_COLUMNS = ("category", "method", "R") + tuple(f"rank_{m}" for m in METRIC_NAMES)

OVERALL_KEY = "overall"

_metric = {"type": ["number", "null"], "minimum": 0, "maximum": 1}
_metric_block = {
    "type": "object",
    "required": list(METRIC_NAMES),
    "properties": {m: _metric for m in METRIC_NAMES},
}
_confusion = {
    "type": "object",
    "required": ["tp", "tn", "fp", "fn"],
    "properties": {k: {"type": "integer", "minimum": 0} for k in ("tp", "tn", "fp", "fn")},
}

BENCH_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["method", "videos", "categories", "overall", "ranking", "failures"],
    "properties": {
        "method": {"type": "string"},
        "videos": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["category", "video", "frames", "scored_frames", "confusion", "metrics", "mean_ms"],
                "properties": {
                    "category": {"type": "string"},
                    "video": {"type": "string"},
                    "frames": {"type": "integer", "minimum": 0},
                    "scored_frames": {"type": "integer", "minimum": 0},
                    "confusion": _confusion,
                    "metrics": _metric_block,
                    "mean_ms": {"type": "number", "minimum": 0},
                },
            },
        },
        "categories": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["videos", "confusion", "metrics", "pooled_metrics"],
                "properties": {
                    "videos": {"type": "integer", "minimum": 1},
                    "confusion": _confusion,
                    "metrics": _metric_block,
                    "pooled_metrics": _metric_block,
                },
            },
        },
        "overall": {
            "type": "object",
            "required": ["confusion", "metrics", "pooled_metrics", "RC"],
            "properties": {
                "confusion": _confusion,
                "metrics": _metric_block,
                "pooled_metrics": _metric_block,
                "RC": {"type": "object", "additionalProperties": {"type": "number", "minimum": 1}},
            },
        },
        "ranking": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["method", "R", "ranks"],
                    "properties": {
                        "method": {"type": "string"},
                        "R": {"type": "number", "minimum": 1},
                        "ranks": {"type": "object", "required": list(METRIC_NAMES)},
                    },
                },
            },
        },
        "failures": {"type": "array", "items": {"type": "string"}},
    },
}


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in columns})


def write_json(path: Path, payload: Any) -> None:
    Path(path).write_text(json.dumps(payload, indent=2))


def _parse_metric(raw: str, where: str) -> float | None:
    raw = raw.strip()
    if raw == "" or raw.lower() in ("nan", "none", "null", "-"):
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ValueError(f"{where}: not a number: {raw!r}") from exc


def read_fixtures(path: str | Path) -> dict[str, dict[str, MetricSet]]:
    """Metric rows grouped by category (``"overall"`` when there is no category column)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in ("method",) + METRIC_NAMES if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(missing)}")
        reader.fieldnames = header
        groups: dict[str, dict[str, MetricSet]] = {}
        for lineno, row in enumerate(reader, start=2):
            category = (row.get("category") or OVERALL_KEY).strip() or OVERALL_KEY
            method = row["method"].strip()
            values = {m: _parse_metric(row[m] or "", f"{path}:{lineno}:{m}") for m in METRIC_NAMES}
            group = groups.setdefault(category, {})
            if method in group:
                raise ValueError(f"{path}:{lineno}: duplicate method {method!r} in {category!r}")
            group[method] = MetricSet(**values)
    if not groups:
        raise ValueError(f"{path}: no metric rows")
    return groups


def rank_groups(groups: Mapping[str, Mapping[str, MetricSet]]) -> tuple[dict[str, RankTable], dict[str, float]]:
    """Rank every category; RC over the methods present in all of them."""
    tables = {cat: rank_methods(rows) for cat, rows in groups.items()}
    common = set.intersection(*(set(t.methods) for t in tables.values()))
    trimmed = {
        cat: rank_methods({m: groups[cat][m] for m in groups[cat] if m in common})
        for cat in tables
    } if any(set(t.methods) != common for t in tables.values()) else tables
    rc = rank_across_categories(trimmed) if common else {}
    return tables, rc


def ranking_rows(tables: Mapping[str, RankTable]) -> list[dict[str, Any]]:
    rows = []
    for cat, table in tables.items():
        for method, r in table.ordered():
            row = {"category": cat, "method": method, "R": r}
            row.update({f"rank_{m}": table.rank_of(method, m) for m in METRIC_NAMES})
            rows.append(row)
    return rows


def ranking_json(tables: Mapping[str, RankTable]) -> dict[str, list[dict[str, Any]]]:
    return {
        cat: [
            {"method": m, "R": r, "ranks": {n: table.rank_of(m, n) for n in METRIC_NAMES}}
            for m, r in table.ordered()
        ]
        for cat, table in tables.items()
    }


def overall_rows(metrics: Mapping[str, MetricSet], rc: Mapping[str, float]) -> list[dict[str, Any]]:
    rows = [{"method": m, "RC": rc.get(m), **ms.as_dict()} for m, ms in metrics.items()]
    return sorted(rows, key=lambda r: (r["RC"] is None, r["RC"] if r["RC"] is not None else 0.0))
