"""Layer 1: dynamic background subtraction.

Two variants produce a difference plane (0 = background, >0 = foreground
evidence) for the spiking layers:

* ``frame-diff`` -- thresholded absolute difference against the previous frame.
* ``sample-consensus`` -- a per-pixel bank of (intensity, ring-pattern
  descriptor) samples with a consensus match rule and stochastic
  conservative updates. This approximates the behaviour of sample-consensus
  subtractors such as GSOC/LSBP; it is not a bit-exact port of either.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frames import check_gray, check_same_shape
from .parallel import SERIAL, RowPool

MODES = ("frame-diff", "sample-consensus")

# Ring of the 5x5 window around the centre, row-major; bit i <-> RING_OFFSETS[i].
RING_OFFSETS: tuple[tuple[int, int], ...] = tuple(
    (dx, dy) for dy in range(-2, 3) for dx in range(-2, 3) if (dx, dy) != (0, 0)
)
# 4-neighbourhood used for sample diffusion, as (dy, dx).
_NEIGHBOURS_DY = np.array([-1, 1, 0, 0])
_NEIGHBOURS_DX = np.array([0, 0, -1, 1])


@dataclass
class BsConfig:
    mode: str = "sample-consensus"
    threshold: int = 15
    samples: int = 20
    match_threshold: int = 25
    hamming_threshold: int = 4
    min_matches: int = 2
    p_replace: float = 0.01
    p_neighbor: float = 0.003
    lsbp_margin: int = 4
    init_jitter: int = 8
    seed: int = 42

    def validate(self) -> list[str]:
        errors = []
        if self.mode not in MODES:
            errors.append(f"bs.mode: must be one of {', '.join(MODES)} (got {self.mode!r})")
        if not 0 <= self.threshold <= 255:
            errors.append(f"bs.threshold: must lie in [0, 255] (got {self.threshold})")
        if self.samples < 1:
            errors.append(f"bs.samples: must be >= 1 (got {self.samples})")
        if not 0 <= self.min_matches <= self.samples:
            errors.append(
                f"bs.min_matches: must lie in [0, bs.samples={self.samples}] (got {self.min_matches})"
            )
        if self.match_threshold < 0:
            errors.append(f"bs.match_threshold: must be >= 0 (got {self.match_threshold})")
        if not 0 <= self.hamming_threshold <= 32:
            errors.append(f"bs.hamming_threshold: must lie in [0, 32] (got {self.hamming_threshold})")
        for name in ("p_replace", "p_neighbor"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                errors.append(f"bs.{name}: must lie in [0, 1] (got {p})")
        if self.lsbp_margin < 0:
            errors.append(f"bs.lsbp_margin: must be >= 0 (got {self.lsbp_margin})")
        if not 0 <= self.init_jitter <= 255:
            errors.append(f"bs.init_jitter: must lie in [0, 255] (got {self.init_jitter})")
        return errors


def frame_diff(curr: np.ndarray, prev: np.ndarray, threshold: int) -> np.ndarray:
    """``|curr - prev|`` where it reaches ``threshold``, else 0."""
    curr, prev = check_gray(curr), check_gray(prev)
    check_same_shape(curr, prev)
    diff = np.abs(curr.astype(np.int16) - prev.astype(np.int16))
    diff[diff < threshold] = 0
    return diff.astype(np.uint8)


def lsbp_descriptor(frame: np.ndarray, x: int, y: int, margin: int = 0) -> int:
    """32-bit ring pattern of pixel ``(x, y)``.

    Bit ``i`` is set when the neighbour at ``RING_OFFSETS[i]`` is brighter than
    ``centre + margin``. Neighbours outside the frame count as equal to the
    centre. Only the low 24 bits are used.
    """
    frame = check_gray(frame)
    h, w = frame.shape
    if not (0 <= x < w and 0 <= y < h):
        raise IndexError(f"pixel ({x}, {y}) outside {w}x{h} frame")
    centre = int(frame[y, x])
    pattern = 0
    for bit, (dx, dy) in enumerate(RING_OFFSETS):
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and int(frame[ny, nx]) > centre + margin:
            pattern |= 1 << bit
    return pattern


def descriptor_plane(frame: np.ndarray, margin: int = 0, rows: slice = slice(None)) -> np.ndarray:
    """Vectorised :func:`lsbp_descriptor` for every pixel in ``rows``."""
    h, w = frame.shape
    r0, r1, _ = rows.indices(h)
    # -1 padding can never exceed centre + margin, which gives the out-of-bounds rule
    padded = np.pad(frame.astype(np.int16), 2, constant_values=-1)
    centre = padded[r0 + 2 : r1 + 2, 2 : w + 2] + margin
    out = np.zeros((r1 - r0, w), dtype=np.uint32)
    for bit, (dx, dy) in enumerate(RING_OFFSETS):
        neigh = padded[r0 + 2 + dy : r1 + 2 + dy, 2 + dx : w + 2 + dx]
        out |= (neigh > centre).astype(np.uint32) << np.uint32(bit)
    return out


@dataclass
class BgModel:
    """Per-pixel sample bank; arrays are ``(N, H, W)``."""

    intensities: np.ndarray
    descriptors: np.ndarray
    config: BsConfig
    rng: np.random.Generator = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.intensities.shape[1:]

    @property
    def n_samples(self) -> int:
        return self.intensities.shape[0]


def bg_init(first: np.ndarray, cfg: BsConfig) -> BgModel:
    """Seed every pixel's bank from the first frame.

    Sample 0 is the frame itself; the rest get uniform integer jitter of at
    most ``cfg.init_jitter``. All samples share the first frame's descriptor.
    """
    first = check_gray(first).astype(np.uint8)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.samples
    h, w = first.shape
    intens = np.empty((n, h, w), dtype=np.uint8)
    intens[0] = first
    if n > 1:
        jitter = rng.integers(-cfg.init_jitter, cfg.init_jitter + 1, size=(n - 1, h, w))
        intens[1:] = np.clip(first.astype(np.int16) + jitter, 0, 255)
    desc = descriptor_plane(first, cfg.lsbp_margin)
    descs = np.broadcast_to(desc, (n, h, w)).copy()
    return BgModel(intens, descs, cfg, rng)


def _decide(model: BgModel, frame: np.ndarray, desc: np.ndarray, rows: slice) -> np.ndarray:
    cfg = model.config
    cur = frame[rows].astype(np.int16)
    close = np.abs(model.intensities[:, rows].astype(np.int16) - cur) <= cfg.match_threshold
    ham = np.bitwise_count(model.descriptors[:, rows] ^ desc[rows])
    matches = np.count_nonzero(close & (ham <= cfg.hamming_threshold), axis=0)
    return matches >= cfg.min_matches


def bg_apply(
    model: BgModel, frame: np.ndarray, pool: RowPool = SERIAL
) -> tuple[np.ndarray, BgModel]:
    """Classify ``frame`` against ``model``, then update the model in place.

    Every decision is taken against the pre-frame model; the stochastic
    update runs afterwards from the model's own generator, so the output does
    not depend on the number of worker threads.
    """
    frame = check_gray(frame).astype(np.uint8)
    if frame.shape != model.shape:
        raise ValueError(f"dimension mismatch: model {model.shape} vs frame {frame.shape}")
    cfg = model.config
    h, w = frame.shape
    desc = np.empty((h, w), dtype=np.uint32)
    background = np.empty((h, w), dtype=bool)

    def kernel(rows: slice) -> None:
        desc[rows] = descriptor_plane(frame, cfg.lsbp_margin, rows)
        background[rows] = _decide(model, frame, desc, rows)

    pool.map_rows(h, kernel)

    _update(model, frame, desc, background)
    out = np.where(background, 0, 255).astype(np.uint8)
    return out, model


def _update(model: BgModel, frame: np.ndarray, desc: np.ndarray, background: np.ndarray) -> None:
    cfg, rng = model.config, model.rng
    n = model.n_samples
    h, w = frame.shape

    ys, xs = np.nonzero(background & (rng.random((h, w)) < cfg.p_replace))
    slot = rng.integers(0, n, size=ys.size)
    model.intensities[slot, ys, xs] = frame[ys, xs]
    model.descriptors[slot, ys, xs] = desc[ys, xs]

    ys, xs = np.nonzero(background & (rng.random((h, w)) < cfg.p_neighbor))
    direction = rng.integers(0, 4, size=ys.size)
    slot = rng.integers(0, n, size=ys.size)
    ny = ys + _NEIGHBOURS_DY[direction]
    nx = xs + _NEIGHBOURS_DX[direction]
    inside = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
    ys, xs, ny, nx, slot = ys[inside], xs[inside], ny[inside], nx[inside], slot[inside]
    if ys.size == 0:
        return
    # colliding writes: the last source in raster order wins
    target = (slot * h + ny) * w + nx
    _, first_in_reversed = np.unique(target[::-1], return_index=True)
    keep = target.size - 1 - first_in_reversed
    model.intensities[slot[keep], ny[keep], nx[keep]] = frame[ys[keep], xs[keep]]
    model.descriptors[slot[keep], ny[keep], nx[keep]] = desc[ys[keep], xs[keep]]


class FrameDiffSubtractor:
    """Differencing against the previous frame; the first frame yields zeros."""

    def __init__(self, cfg: BsConfig):
        self.cfg = cfg
        self.previous: np.ndarray | None = None

    def apply(self, gray: np.ndarray, pool: RowPool = SERIAL) -> np.ndarray:
        prev = gray if self.previous is None else self.previous
        out = frame_diff(gray, prev, self.cfg.threshold)
        self.previous = gray
        return out


class SampleConsensusSubtractor:
    def __init__(self, cfg: BsConfig):
        self.cfg = cfg
        self.model: BgModel | None = None

    def apply(self, gray: np.ndarray, pool: RowPool = SERIAL) -> np.ndarray:
        if self.model is None:
            self.model = bg_init(gray, self.cfg)
            return np.zeros(gray.shape, dtype=np.uint8)
        out, _ = bg_apply(self.model, gray, pool)
        return out


def make_subtractor(cfg: BsConfig):
    if cfg.mode == "frame-diff":
        return FrameDiffSubtractor(cfg)
    if cfg.mode == "sample-consensus":
        return SampleConsensusSubtractor(cfg)
    raise ValueError(f"unknown background-subtraction mode {cfg.mode!r}")
