"""Benchmark driver: run the pipeline over a CDnet-layout dataset and report."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import reports
from .cdnet import CategoryResult, VideoError, VideoResult, discover_dataset, group_by_category, run_video
from .config import REPORT_FORMATS, PipelineConfig
from .metrics import MetricSet, accumulate, compute_metrics, mean_metrics
from .parallel import RowPool

log = logging.getLogger(__name__)


class BenchError(RuntimeError):
    pass


@dataclass
class BenchResult:
    method: str
    videos: list[VideoResult]
    categories: dict[str, CategoryResult]
    failures: list[str] = field(default_factory=list)
    compare: Mapping[str, Mapping[str, MetricSet]] = field(default_factory=dict)

    @property
    def overall_metrics(self) -> MetricSet:
        return mean_metrics(c.metrics for c in self.categories.values())

    def ranking(self):
        groups = {}
        for name, cat in self.categories.items():
            rows = {self.method: cat.metrics}
            rows.update({m: ms for m, ms in self.compare.get(name, {}).items() if m != self.method})
            groups[name] = rows
        return reports.rank_groups(groups)

    def to_json(self) -> dict:
        tables, rc = self.ranking()
        overall_conf = accumulate(c.confusion for c in self.categories.values())
        return {
            "method": self.method,
            "videos": [
                {
                    "category": v.category,
                    "video": v.video,
                    "frames": v.frames_processed,
                    "scored_frames": len(v.frames),
                    "confusion": v.confusion.as_dict(),
                    "metrics": v.metrics.as_dict(),
                    "mean_ms": v.mean_ms,
                }
                for v in self.videos
            ],
            "categories": {
                name: {
                    "videos": len(c.videos),
                    "confusion": c.confusion.as_dict(),
                    "metrics": c.metrics.as_dict(),
                    "pooled_metrics": c.pooled_metrics.as_dict(),
                }
                for name, c in self.categories.items()
            },
            "overall": {
                "confusion": overall_conf.as_dict(),
                "metrics": self.overall_metrics.as_dict(),
                "pooled_metrics": compute_metrics(overall_conf).as_dict(),
                "RC": rc,
            },
            "ranking": reports.ranking_json(tables),
            "failures": list(self.failures),
        }

    def write(self, out: Path, formats: Sequence[str] = REPORT_FORMATS) -> list[Path]:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        tables, rc = self.ranking()
        if "json" in formats:
            path = out / "report.json"
            reports.write_json(path, self.to_json())
            written.append(path)
        if "csv" in formats:
            video_rows = [
                {
                    "category": v.category,
                    "video": v.video,
                    "frames": v.frames_processed,
                    "scored_frames": len(v.frames),
                    **_upper(v.confusion.as_dict()),
                    **v.metrics.as_dict(),
                    "mean_ms": v.mean_ms,
                }
                for v in self.videos
            ]
            cat_rows = [
                {
                    "category": name,
                    "method": self.method,
                    "videos": len(c.videos),
                    **_upper(c.confusion.as_dict()),
                    **c.metrics.as_dict(),
                    **{f"pooled_{k}": v for k, v in c.pooled_metrics.as_dict().items()},
                }
                for name, c in self.categories.items()
            ]
            overall = {self.method: self.overall_metrics}
            for m in rc:
                if m not in overall:
                    overall[m] = mean_metrics(
                        self.compare[c][m] for c in self.categories if m in self.compare.get(c, {})
                    )
            for name, columns, rows in (
                ("videos.csv", reports.VIDEO_COLUMNS, video_rows),
                ("categories.csv", reports.CATEGORY_COLUMNS, cat_rows),
                ("overall.csv", reports.OVERALL_COLUMNS, reports.overall_rows(overall, rc)),
                ("ranking.csv", reports.RANKING_COLUMNS, reports.ranking_rows(tables)),
            ):
                path = out / name
                reports.write_csv(path, columns, rows)
                written.append(path)
        return written


def _upper(d: Mapping[str, int]) -> dict[str, int]:
    return {k.upper(): v for k, v in d.items()}


def bench(
    cfg: PipelineConfig,
    root: str | Path,
    categories: Sequence[str] | None = None,
    compare: Mapping[str, Mapping[str, MetricSet]] | None = None,
) -> BenchResult:
    """Run every discovered video; failed videos are logged and excluded."""
    entries = discover_dataset(root)
    if categories:
        wanted = set(categories)
        entries = [e for e in entries if e.category in wanted]
    if not entries:
        raise BenchError(f"no valid videos under {root}")

    mask_root = Path(cfg.out) / "results" if cfg.out and cfg.dump_masks else None
    results, failures = [], []
    with RowPool(cfg.threads) as pool:
        for entry in entries:
            log.info("processing %s", entry.key)
            mask_dir = mask_root / entry.category / entry.name if mask_root else None
            try:
                results.append(run_video(entry, cfg, pool, mask_dir))
            except VideoError as exc:
                log.error("video failed: %s", exc)
                failures.append(str(exc))
    if not results:
        raise BenchError("every video failed:\n  " + "\n  ".join(failures))
    return BenchResult(cfg.method_name, results, group_by_category(results), failures, dict(compare or {}))
