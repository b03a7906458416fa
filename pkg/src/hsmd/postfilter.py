"""Layer 5: averaging filter, normalisation and binarisation of L4 spike counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FILTER_MODES = ("average", "median")


@dataclass(frozen=True)
class AveragingKernel:
    """``u`` x ``v`` box window (width x height), weights all 1, scaled by 1/(u v)."""

    u: int = 3
    v: int = 3

    def __post_init__(self):
        for name in ("u", "v"):
            size = getattr(self, name)
            if size < 1 or size % 2 == 0:
                raise ValueError(f"kernel {name} must be odd and >= 1, got {size}")

    @property
    def weights(self) -> np.ndarray:
        return np.full((self.v, self.u), 1.0 / (self.u * self.v))


def _check_fits(m: np.ndarray, k: AveragingKernel) -> None:
    h, w = m.shape
    if k.u > w or k.v > h:
        raise ValueError(f"{k.u}x{k.v} kernel larger than {w}x{h} image")


def average_filter(m: np.ndarray, k: AveragingKernel = AveragingKernel()) -> np.ndarray:
    """Zero-padded box mean, computed from a summed-area table.

    Integer spike counts stay exact in the float64 table, so the result does
    not depend on summation order.
    """
    m = np.asarray(m, dtype=np.float64)
    _check_fits(m, k)
    ry, rx = k.v // 2, k.u // 2
    padded = np.pad(m, ((ry + 1, ry), (rx + 1, rx)))
    sat = padded.cumsum(axis=0).cumsum(axis=1)
    h, w = m.shape
    total = (
        sat[k.v : k.v + h, k.u : k.u + w]
        - sat[: h, k.u : k.u + w]
        - sat[k.v : k.v + h, : w]
        + sat[: h, : w]
    )
    return total / (k.u * k.v)


def median_filter(m: np.ndarray, k: AveragingKernel = AveragingKernel()) -> np.ndarray:
    from scipy import ndimage

    m = np.asarray(m, dtype=np.float64)
    _check_fits(m, k)
    return ndimage.median_filter(m, size=(k.v, k.u), mode="constant", cval=0.0)


def normalise(f: np.ndarray) -> np.ndarray:
    """Scale so the maximum becomes 255; an all-zero plane stays zero."""
    f = np.asarray(f, dtype=np.float64)
    peak = f.max(initial=0.0)
    if peak <= 0.0:
        return np.zeros_like(f)
    return f * (255.0 / peak)


def binarise(m: np.ndarray, threshold: float = 128) -> np.ndarray:
    return np.where(np.asarray(m) >= threshold, 255, 0).astype(np.uint8)


def postfilter(
    counts: np.ndarray,
    kernel: AveragingKernel = AveragingKernel(),
    threshold: float = 128,
    mode: str = "average",
) -> np.ndarray:
    """Spike counts -> binary motion mask."""
    if mode == "average":
        filtered = average_filter(counts, kernel)
    elif mode == "median":
        filtered = median_filter(counts, kernel)
    else:
        raise ValueError(f"unknown filter mode {mode!r}")
    return binarise(normalise(filtered), threshold)
