"""CDnet 2012/2014 layout ingestion and per-video / per-category scoring.

Expected layout::

    ROOT/<category>/<video>/input/in000001.jpg ...
    ROOT/<category>/<video>/groundtruth/gt000001.png ...
    ROOT/<category>/<video>/temporalROI.txt      "first last"
    ROOT/<category>/<video>/ROI.bmp              optional spatial ROI

Ground-truth labels: 0 static, 50 shadow, 85 outside ROI, 170 unknown,
255 moving. Shadow counts as background; 85 and 170 are not scored.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import PipelineConfig
from .frames import FrameError, frame_number, list_images, load_frame, load_gray, write_mask
from .metrics import Confusion, MetricSet, accumulate, compute_metrics, mean_metrics
from .parallel import RowPool
from .pipeline import Pipeline

log = logging.getLogger(__name__)

STATIC, SHADOW, OUTSIDE_ROI, UNKNOWN, MOVING = 0, 50, 85, 170, 255
LABELS = (STATIC, SHADOW, OUTSIDE_ROI, UNKNOWN, MOVING)
ROI_NAMES = ("ROI.bmp", "ROI.png", "ROI.jpg")


class VideoError(RuntimeError):
    pass


@dataclass
class VideoEntry:
    category: str
    name: str
    input_dir: Path
    gt_dir: Path
    temporal_roi: tuple[int, int]
    roi_path: Path | None = None

    def __post_init__(self):
        first, last = self.temporal_roi
        if first > last:
            raise ValueError(f"{self.category}/{self.name}: temporal ROI {first} > {last}")

    @property
    def key(self) -> str:
        return f"{self.category}/{self.name}"

    def input_frames(self) -> list[tuple[int, Path]]:
        return sorted((frame_number(p), p) for p in list_images(self.input_dir, "in*"))

    def gt_frames(self) -> dict[int, Path]:
        return {frame_number(p): p for p in list_images(self.gt_dir, "gt*")}

    def spatial_roi(self) -> np.ndarray | None:
        if self.roi_path is None:
            return None
        return load_gray(self.roi_path) > 127


def read_temporal_roi(path: Path) -> tuple[int, int]:
    parts = path.read_text().split()
    if len(parts) < 2:
        raise ValueError(f"{path}: expected two integers")
    return int(parts[0]), int(parts[1])


def discover_dataset(root: str | Path) -> list[VideoEntry]:
    """One entry per ``category/video`` that has inputs, ground truth and a temporal ROI."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root not found: {root}")
    entries = []
    for category in sorted(p for p in root.iterdir() if p.is_dir()):
        for video in sorted(p for p in category.iterdir() if p.is_dir()):
            input_dir = video / "input"
            if not input_dir.is_dir():
                continue
            where = f"{category.name}/{video.name}"
            gt_dir = video / "groundtruth"
            if not gt_dir.is_dir():
                log.warning("skipping %s: no groundtruth directory", where)
                continue
            roi_file = video / "temporalROI.txt"
            if not roi_file.is_file():
                log.warning("skipping %s: no temporalROI.txt", where)
                continue
            try:
                temporal = read_temporal_roi(roi_file)
                roi_path = next((video / n for n in ROI_NAMES if (video / n).is_file()), None)
                entries.append(VideoEntry(category.name, video.name, input_dir, gt_dir, temporal, roi_path))
            except ValueError as exc:
                log.warning("skipping %s: %s", where, exc)
    return entries


def frame_confusion(pred: np.ndarray, gt: np.ndarray, roi: np.ndarray | None = None) -> Confusion:
    """Score one predicted mask against a ground-truth label frame."""
    if pred.shape != gt.shape or (roi is not None and roi.shape != gt.shape):
        raise ValueError(f"dimension mismatch: pred {pred.shape}, gt {gt.shape}")
    legal = np.isin(gt, LABELS)
    if not legal.all():
        bad = sorted(set(np.unique(gt[~legal]).tolist()))
        raise ValueError(f"illegal ground-truth label values {bad}")
    scored = (gt != OUTSIDE_ROI) & (gt != UNKNOWN)
    if roi is not None:
        scored &= roi.astype(bool)
    positive = pred == 255
    moving = gt == MOVING
    negative = scored & ~moving
    moving &= scored
    return Confusion(
        tp=int(np.count_nonzero(moving & positive)),
        tn=int(np.count_nonzero(negative & ~positive)),
        fp=int(np.count_nonzero(negative & positive)),
        fn=int(np.count_nonzero(moving & ~positive)),
    )


@dataclass
class VideoResult:
    category: str
    video: str
    frames: list[tuple[int, Confusion]] = field(default_factory=list)
    ms_per_frame: list[float] = field(default_factory=list)

    @property
    def confusion(self) -> Confusion:
        return accumulate(c for _, c in self.frames)

    @property
    def metrics(self) -> MetricSet:
        return compute_metrics(self.confusion)

    @property
    def frames_processed(self) -> int:
        return len(self.ms_per_frame)

    @property
    def mean_ms(self) -> float:
        return float(np.mean(self.ms_per_frame)) if self.ms_per_frame else 0.0


@dataclass
class CategoryResult:
    name: str
    videos: list[VideoResult] = field(default_factory=list)

    @property
    def confusion(self) -> Confusion:
        return accumulate(v.confusion for v in self.videos)

    @property
    def pooled_metrics(self) -> MetricSet:
        return compute_metrics(self.confusion)

    @property
    def metrics(self) -> MetricSet:
        """Unweighted mean over videos (the ranking default)."""
        return mean_metrics(v.metrics for v in self.videos)


def run_video(
    entry: VideoEntry,
    cfg: PipelineConfig,
    pool: RowPool | None = None,
    mask_dir: Path | None = None,
) -> VideoResult:
    """Process every frame in order, scoring only those inside the temporal ROI."""
    first, last = entry.temporal_roi
    inputs = entry.input_frames()
    if not inputs:
        raise VideoError(f"{entry.key}: no input frames")
    gts = entry.gt_frames()
    try:
        roi = entry.spatial_roi()
    except FrameError as exc:
        raise VideoError(f"{entry.key}: {exc}") from exc
    result = VideoResult(entry.category, entry.name)
    if mask_dir is not None:
        mask_dir.mkdir(parents=True, exist_ok=True)

    with Pipeline(cfg, pool) as pipe:
        for number, path in inputs:
            try:
                rgb = load_frame(path)
            except FrameError as exc:
                raise VideoError(f"{entry.key}: {exc}") from exc
            t0 = time.perf_counter()
            mask = pipe.process(rgb)
            result.ms_per_frame.append((time.perf_counter() - t0) * 1e3)
            if mask_dir is not None:
                write_mask(mask, mask_dir / f"bin{number:06d}.png")
            if not first <= number <= last:
                continue
            if number not in gts:
                log.warning("%s: no ground truth for frame %d, not scored", entry.key, number)
                continue
            try:
                gt = load_gray(gts[number])
                frame_roi = roi if roi is not None and roi.shape == gt.shape else None
                result.frames.append((number, frame_confusion(mask, gt, frame_roi)))
            except (FrameError, ValueError) as exc:
                raise VideoError(f"{entry.key} frame {number}: {exc}") from exc
    return result


def group_by_category(results: Iterable[VideoResult]) -> dict[str, CategoryResult]:
    categories: dict[str, CategoryResult] = {}
    for r in results:
        categories.setdefault(r.category, CategoryResult(r.category)).videos.append(r)
    return dict(sorted(categories.items()))


def overall_metrics(categories: Sequence[CategoryResult]) -> MetricSet:
    return mean_metrics(c.metrics for c in categories)
