"""Frame representation, decoding, grayscale conversion and mask encoding.

Frames are plain numpy arrays in row-major (height, width[, channel]) order:

* RGB frame  -- ``uint8`` of shape ``(H, W, 3)``
* gray frame -- ``uint8`` of shape ``(H, W)``
* mask frame -- ``uint8`` of shape ``(H, W)`` holding only 0 and 255
"""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image, UnidentifiedImageError

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp", ".tif", ".tiff")

# BT.601 luma weights, in thousandths so that rounding is exact integer math.
_LUMA_WEIGHTS = np.array([299, 587, 114], dtype=np.int32)


class FrameError(Exception):
    """Raised when a frame cannot be read, decoded or written."""

    def __init__(self, message: str, path: str | os.PathLike | None = None):
        self.path = None if path is None else str(path)
        super().__init__(f"{message}: {self.path}" if path is not None else message)


def check_rgb(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB frame, got shape {frame.shape}")
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise ValueError("frame must have positive width and height")
    if frame.dtype != np.uint8:
        raise ValueError(f"expected uint8 frame, got {frame.dtype}")
    return frame


def check_gray(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ValueError(f"expected an (H, W) single-channel frame, got shape {frame.shape}")
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise ValueError("frame must have positive width and height")
    return frame


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"dimension mismatch: {a.shape[:2]} vs {b.shape[:2]}")


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """Convert an RGB frame to 8-bit luma, ``round(0.299 R + 0.587 G + 0.114 B)``.

    Rounding is half-up; the weights sum to one so the result never leaves [0, 255].
    """
    frame = check_rgb(frame)
    acc = frame.astype(np.int32) @ _LUMA_WEIGHTS
    return ((acc + 500) // 1000).astype(np.uint8)


def resize_gray(gray: np.ndarray, scale: float) -> np.ndarray:
    """Optional throughput reduction; ``scale == 1`` is the identity."""
    if scale == 1.0:
        return gray
    import cv2

    h, w = gray.shape
    size = (max(1, round(w * scale)), max(1, round(h * scale)))
    return cv2.resize(gray, size, interpolation=cv2.INTER_AREA)


def load_frame(path: str | os.PathLike) -> np.ndarray:
    """Decode a JPEG/PNG file into an RGB frame.

    Grayscale sources are promoted to RGB by channel replication.
    """
    path = Path(path)
    if not path.is_file():
        raise FrameError("file not found", path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("RGB", "L"):
                img = img.convert("RGB")
            data = np.asarray(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FrameError(f"decode failure ({exc})", path) from exc
    if data.ndim == 2:
        data = np.repeat(data[:, :, None], 3, axis=2)
    return np.ascontiguousarray(data)


def load_gray(path: str | os.PathLike) -> np.ndarray:
    """Read a single-channel image as-is (ground truth, ROI masks)."""
    path = Path(path)
    if not path.is_file():
        raise FrameError("file not found", path)
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode != "L":
                img = img.convert("L")
            return np.array(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FrameError(f"decode failure ({exc})", path) from exc


def write_mask(mask: np.ndarray, path: str | os.PathLike) -> None:
    """Write a {0, 255} mask as an 8-bit single-channel PNG."""
    mask = check_gray(mask)
    if not np.isin(mask, (0, 255)).all():
        raise ValueError("mask values must be 0 or 255")
    path = Path(path)
    try:
        Image.fromarray(mask.astype(np.uint8), mode="L").save(path, format="PNG")
    except OSError as exc:
        raise FrameError(f"I/O failure ({exc.strerror or exc})", path) from exc


def write_gray(plane: np.ndarray, path: str | os.PathLike) -> None:
    path = Path(path)
    try:
        Image.fromarray(np.asarray(plane, dtype=np.uint8), mode="L").save(path, format="PNG")
    except OSError as exc:
        raise FrameError(f"I/O failure ({exc.strerror or exc})", path) from exc


_DIGITS = re.compile(r"(\d+)")


def frame_number(path: str | os.PathLike) -> int:
    """Last run of digits in a file stem, e.g. ``in000123.jpg`` -> 123."""
    found = _DIGITS.findall(Path(path).stem)
    if not found:
        raise ValueError(f"no frame number in {path}")
    return int(found[-1])


def _natural_key(path: Path):
    return [int(tok) if tok.isdigit() else tok for tok in _DIGITS.split(path.name)]


def list_images(directory: str | os.PathLike, pattern: str = "*") -> list[Path]:
    directory = Path(directory)
    files = [p for p in directory.glob(pattern) if p.suffix.lower() in IMAGE_SUFFIXES]
    return sorted(files, key=_natural_key)


def iter_sequence(directory: str | os.PathLike) -> Iterator[np.ndarray]:
    """Yield RGB frames from an image-sequence directory in natural order."""
    for path in list_images(directory):
        yield load_frame(path)


def iter_video(source: str | int) -> Iterator[np.ndarray]:
    """Yield RGB frames from a video file or a capture-device index."""
    import cv2

    cap = cv2.VideoCapture(source)
    if not cap.isOpened():
        raise FrameError("cannot open video source", str(source))
    try:
        while True:
            ok, bgr = cap.read()
            if not ok:
                break
            yield cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    finally:
        cap.release()
