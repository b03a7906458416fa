"""Synthetic sequences with ground truth by construction."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image


@dataclass(frozen=True)
class MovingSquare:
    """A textured square sliding horizontally over a static textured background,
    bouncing off the frame edges."""

    size: int = 64
    frames: int = 60
    square: int = 12
    speed: int = 2
    seed: int = 7

    def positions(self) -> list[tuple[int, int]]:
        span = self.size - self.square
        y = (self.size - self.square) // 2
        x, step, out = 0, self.speed, []
        for _ in range(self.frames):
            out.append((x, y))
            if not 0 <= x + step <= span:
                step = -step
            x += step
        return out

    def generate(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Returns ``(rgb_frames, gt_frames)``; ground truth uses 255 moving / 0 static."""
        rng = np.random.default_rng(self.seed)
        background = rng.integers(0, 256, size=(self.size, self.size), dtype=np.uint8)
        patch = rng.integers(0, 256, size=(self.square, self.square), dtype=np.uint8)
        frames, gts = [], []
        for x, y in self.positions():
            gray = background.copy()
            gray[y : y + self.square, x : x + self.square] = patch
            gt = np.zeros_like(gray)
            gt[y : y + self.square, x : x + self.square] = 255
            frames.append(np.repeat(gray[:, :, None], 3, axis=2))
            gts.append(gt)
        return frames, gts


def write_cdnet_video(
    root: str | Path,
    category: str,
    video: str,
    frames: list[np.ndarray],
    gts: list[np.ndarray],
    temporal_roi: tuple[int, int] | None = None,
    roi: np.ndarray | None = None,
    jpeg: bool = False,
) -> Path:
    """Lay out a sequence as ``root/category/video`` in the CDnet convention.

    Inputs are written as PNG data under ``in%06d.jpg`` names unless ``jpeg``
    is set, which keeps them lossless for exact tests.
    """
    vdir = Path(root) / category / video
    (vdir / "input").mkdir(parents=True, exist_ok=True)
    (vdir / "groundtruth").mkdir(parents=True, exist_ok=True)
    for i, (rgb, gt) in enumerate(zip(frames, gts), start=1):
        Image.fromarray(rgb).save(vdir / "input" / f"in{i:06d}.jpg", format="JPEG" if jpeg else "PNG")
        Image.fromarray(gt).save(vdir / "groundtruth" / f"gt{i:06d}.png", format="PNG")
    first, last = temporal_roi or (1, len(frames))
    (vdir / "temporalROI.txt").write_text(f"{first} {last}\n")
    if roi is not None:
        Image.fromarray(np.where(roi, 255, 0).astype(np.uint8)).save(vdir / "ROI.bmp")
    return vdir
