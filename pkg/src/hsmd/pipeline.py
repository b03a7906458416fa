"""Per-frame orchestration: grayscale -> background subtraction -> spiking
network -> averaging filter -> normalise -> binarise."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .background import make_subtractor
from .config import ConfigError, PipelineConfig
from .frames import FrameError, iter_sequence, iter_video, resize_gray, to_grayscale, write_gray, write_mask
from .parallel import RowPool
from .postfilter import AveragingKernel, postfilter
from .snn import Network

log = logging.getLogger(__name__)

STAGES = ("bs", "snn", "filter")


class Pipeline:
    """Stateful detector for one frame stream. Not shareable between streams."""

    def __init__(self, cfg: PipelineConfig, pool: RowPool | None = None):
        self.cfg = cfg
        self._own_pool = pool is None
        self.pool = pool or RowPool(cfg.threads)
        self.kernel = AveragingKernel(*cfg.kernel)
        self.subtractor = make_subtractor(cfg.bs)
        self.network: Network | None = None
        self.last_counts: np.ndarray | None = None
        self.stage_ms: dict[str, float] = dict.fromkeys(STAGES, 0.0)

    def process(self, rgb: np.ndarray) -> np.ndarray:
        return self.process_gray(to_grayscale(rgb))

    def process_gray(self, gray: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        gray = resize_gray(gray, cfg.scale)
        if self.network is None:
            h, w = gray.shape
            self.network = Network(w, h, cfg.neuron, cfg.weights, cfg.c)
        elif gray.shape != self.network.shape:
            raise ValueError(f"frame size changed mid-stream: {self.network.shape} -> {gray.shape}")

        t0 = time.perf_counter()
        diff = self.subtractor.apply(gray, self.pool)
        t1 = time.perf_counter()
        counts = self.network.run_frame(diff, cfg.substeps, self.pool)
        t2 = time.perf_counter()
        mask = postfilter(counts, self.kernel, cfg.binarise_threshold, cfg.filter_mode)
        t3 = time.perf_counter()

        self.last_counts = counts
        self.stage_ms = {"bs": (t1 - t0) * 1e3, "snn": (t2 - t1) * 1e3, "filter": (t3 - t2) * 1e3}
        return mask

    def close(self) -> None:
        if self._own_pool:
            self.pool.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class RunReport:
    frames: int = 0
    mean_ms: float = 0.0
    p50_ms: float = 0.0
    p95_ms: float = 0.0
    fps: float = 0.0
    stage_ms: dict[str, float] = field(default_factory=lambda: dict.fromkeys(STAGES, 0.0))
    spike_rate: float = 0.0
    masks_written: int = 0

    @classmethod
    def from_samples(
        cls, frame_ms: list[float], stage_ms: list[dict[str, float]], spikes: list[float], written: int = 0
    ) -> "RunReport":
        if not frame_ms:
            return cls()
        ms = np.asarray(frame_ms)
        mean = float(ms.mean())
        return cls(
            frames=len(frame_ms),
            mean_ms=mean,
            p50_ms=float(np.percentile(ms, 50)),
            p95_ms=float(np.percentile(ms, 95)),
            fps=1000.0 / mean if mean > 0 else 0.0,
            stage_ms={s: float(np.mean([t[s] for t in stage_ms])) for s in STAGES},
            spike_rate=float(np.mean(spikes)),
            masks_written=written,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def summary(self) -> str:
        stages = ", ".join(f"{s} {self.stage_ms[s]:.2f} ms" for s in STAGES)
        return (
            f"{self.frames} frames, {self.mean_ms:.2f} ms/frame (p95 {self.p95_ms:.2f}), "
            f"{self.fps:.2f} fps; {stages}; L4 spike rate {self.spike_rate:.4f}/px/frame"
        )


def open_source(cfg: PipelineConfig) -> Iterator[np.ndarray]:
    kind = cfg.source_kind
    if kind is None:
        raise ConfigError(["source: required"])
    if kind == "device":
        return iter_video(int(cfg.source))
    if kind == "sequence":
        return iter_sequence(cfg.source)
    if kind == "video":
        if not Path(cfg.source).is_file():
            raise FrameError("file not found", cfg.source)
        return iter_video(str(cfg.source))
    raise ConfigError([f"source: {cfg.source} is a dataset root; use bench"])


def run(cfg: PipelineConfig, frames: Iterable[np.ndarray] | None = None) -> RunReport:
    """Process a whole stream; ``frames`` overrides ``cfg.source`` when given."""
    stream = open_source(cfg) if frames is None else frames
    out = Path(cfg.out) if cfg.out else None
    mask_dir = layer_dir = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.dump_masks:
            mask_dir = out / "masks"
            mask_dir.mkdir(exist_ok=True)
        if cfg.dump_layers:
            layer_dir = out / "layers"
            layer_dir.mkdir(exist_ok=True)

    frame_ms, stage_ms, spikes = [], [], []
    written = 0
    with Pipeline(cfg) as pipe:
        for index, rgb in enumerate(stream, start=1):
            t0 = time.perf_counter()
            mask = pipe.process(rgb)
            frame_ms.append((time.perf_counter() - t0) * 1e3)
            stage_ms.append(pipe.stage_ms)
            spikes.append(float(pipe.last_counts.mean()))
            if mask_dir is not None:
                write_mask(mask, mask_dir / f"bin{index:06d}.png")
                written += 1
            if layer_dir is not None:
                for name, plane in pipe.network.spike_planes().items():
                    write_gray(plane, layer_dir / f"{name}_{index:06d}.png")

    report = RunReport.from_samples(frame_ms, stage_ms, spikes, written)
    if out is not None:
        payload = {"config": cfg.to_dict(), "report": report.to_dict()}
        (out / "run_report.json").write_text(json.dumps(payload, indent=2, default=str))
    log.info("run finished: %s", report.summary())
    return report
