"""Pipeline configuration: a YAML key-value file plus command-line overrides.

Schema (every key optional, defaults shown)::

    source: null              # device index, video file, image directory or dataset root
    seed: 42
    threads: 1
    c: 17.5                   # pixel-to-current conversion constant
    substeps: 1               # network timesteps per frame
    kernel: [3, 3]            # averaging window, width x height, odd
    filter_mode: average      # average | median
    binarise_threshold: 128
    scale: 1.0                # optional frame reduction before processing
    out: null                 # output directory
    dump_masks: false
    dump_layers: false        # per-layer spike planes as PNG
    formats: [csv, json]
    method_name: HSMD
    bs:
      mode: sample-consensus  # frame-diff | sample-consensus
      threshold: 15
      samples: 20
      match_threshold: 25
      hamming_threshold: 4
      min_matches: 2
      p_replace: 0.01
      p_neighbor: 0.003
      lsbp_margin: 4
      init_jitter: 8
    neuron:
      tau_m: 10.0
      r: 1.0
      e_l: -70.0
      v_reset: -70.0
      v_min: -70.0
      v_th: -55.0
      t_ref: 2.0
      dt: 10.0
    weights:
      w_p2i: 8.0
      w_syn: 1555.0

``seed`` seeds the background model's generator.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .background import BsConfig
from .postfilter import FILTER_MODES
from .snn import NeuronParams, SynapseWeights

REPORT_FORMATS = ("csv", "json")
SOURCE_KINDS = ("device", "video", "sequence", "dataset")


class ConfigError(ValueError):
    """Config could not be parsed or failed validation; ``errors`` lists each problem."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class PipelineConfig:
    source: str | int | None = None
    bs: BsConfig = field(default_factory=BsConfig)
    neuron: NeuronParams = field(default_factory=NeuronParams)
    weights: SynapseWeights = field(default_factory=SynapseWeights)
    c: float = 17.5
    substeps: int = 1
    kernel: tuple[int, int] = (3, 3)
    filter_mode: str = "average"
    binarise_threshold: float = 128.0
    scale: float = 1.0
    threads: int = 1
    seed: int = 42
    out: str | None = None
    dump_masks: bool = False
    dump_layers: bool = False
    formats: tuple[str, ...] = REPORT_FORMATS
    method_name: str = "HSMD"

    def __post_init__(self):
        # the background model draws from the pipeline-level seed
        if self.bs.seed != self.seed:
            self.bs = dataclasses.replace(self.bs, seed=self.seed)

    @property
    def source_kind(self) -> str | None:
        return source_kind(self.source)

    def validate(self) -> list[str]:
        errors = self.bs.validate() + self.neuron.validate() + self.weights.validate()
        if not (isinstance(self.c, (int, float)) and math.isfinite(self.c) and self.c > 0):
            errors.append(f"c: must be finite and > 0 (got {self.c})")
        if self.substeps < 1:
            errors.append(f"substeps: must be >= 1 (got {self.substeps})")
        if len(self.kernel) != 2 or any(k < 1 or k % 2 == 0 for k in self.kernel):
            errors.append(f"kernel: needs two odd sizes >= 1 (got {list(self.kernel)})")
        if self.filter_mode not in FILTER_MODES:
            errors.append(f"filter_mode: must be one of {', '.join(FILTER_MODES)} (got {self.filter_mode!r})")
        if not 0 <= self.binarise_threshold <= 256:
            errors.append(f"binarise_threshold: must lie in [0, 256] (got {self.binarise_threshold})")
        if not (0 < self.scale <= 1.0):
            errors.append(f"scale: must lie in (0, 1] (got {self.scale})")
        if self.threads < 1:
            errors.append(f"threads: must be >= 1 (got {self.threads})")
        bad = [f for f in self.formats if f not in REPORT_FORMATS]
        if bad or not self.formats:
            errors.append(f"formats: choose from {', '.join(REPORT_FORMATS)} (got {list(self.formats)})")
        return errors

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["kernel"] = list(self.kernel)
        d["formats"] = list(self.formats)
        d["bs"].pop("seed")
        return d


def source_kind(source: str | int | None) -> str | None:
    if source is None:
        return None
    if isinstance(source, int) or (isinstance(source, str) and source.isdigit()):
        return "device"
    path = Path(source)
    if path.is_dir():
        has_videos = any(
            (video / "input").is_dir() for category in path.iterdir() if category.is_dir()
            for video in category.iterdir() if video.is_dir()
        )
        return "dataset" if has_videos else "sequence"
    return "video"


_SECTIONS = {"bs": BsConfig, "neuron": NeuronParams, "weights": SynapseWeights}
_TOP_LEVEL = {f.name for f in dataclasses.fields(PipelineConfig)} - set(_SECTIONS)


def _coerce(name: str, value: Any, default: Any, errors: list[str]) -> Any:
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        errors.append(f"{name}: expected true/false (got {value!r})")
        return default
    if isinstance(default, int):
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            errors.append(f"{name}: expected an integer (got {value!r})")
            return default
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{name}: expected a number (got {value!r})")
            return default
        return float(value)
    if isinstance(default, tuple):
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        if not isinstance(value, (list, tuple)):
            errors.append(f"{name}: expected a list (got {value!r})")
            return default
        if default and all(isinstance(d, int) for d in default):
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                errors.append(f"{name}: expected a list of integers (got {value!r})")
                return default
        return tuple(value)
    if isinstance(default, str):
        return str(value)
    return value


def _build_section(cls, values: Mapping[str, Any], prefix: str, errors: list[str]):
    known = {f.name: f for f in dataclasses.fields(cls)}
    defaults = cls()
    kwargs = {}
    for key, value in values.items():
        if key not in known or key == "seed":
            errors.append(f"{prefix}.{key}: unknown setting")
            continue
        kwargs[key] = _coerce(f"{prefix}.{key}", value, getattr(defaults, key), errors)
    return cls(**kwargs)


def config_from_mapping(data: Mapping[str, Any] | None) -> PipelineConfig:
    """Build and validate a config; raises :class:`ConfigError` listing every bad field."""
    data = dict(data or {})
    errors: list[str] = []
    defaults = PipelineConfig()
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if value is None:
                continue
            if not isinstance(value, Mapping):
                errors.append(f"{key}: expected a mapping of settings")
                continue
            kwargs[key] = _build_section(_SECTIONS[key], value, key, errors)
        elif key in _TOP_LEVEL:
            if key == "source":
                kwargs[key] = value
            else:
                kwargs[key] = _coerce(key, value, getattr(defaults, key), errors)
        else:
            errors.append(f"{key}: unknown setting")
    if errors:
        raise ConfigError(errors)
    cfg = PipelineConfig(**kwargs)
    errors = cfg.validate()
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_overrides(pairs: list[str]) -> dict[str, Any]:
    """``["bs.threshold=20", "c=17.5"]`` -> nested mapping with YAML-typed values."""
    out: dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError([f"override {pair!r}: expected KEY=VALUE"])
        try:
            value = yaml.safe_load(raw) if raw.strip() else None
        except yaml.YAMLError as exc:
            raise ConfigError([f"override {pair!r}: {exc}"]) from exc
        node = out
        *parents, leaf = key.strip().split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return out


def _merge(base: dict[str, Any], extra: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(dict(merged[key]), value)
        else:
            merged[key] = value
    return merged


def load_config(
    path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None
) -> PipelineConfig:
    """Read ``path`` (may be None or empty), apply ``overrides`` on top, validate."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
            raise ConfigError([f"{path}: parse error at {where}: {getattr(exc, 'problem', exc)}"]) from exc
        if loaded is not None and not isinstance(loaded, Mapping):
            raise ConfigError([f"{path}: top level must be a mapping of settings"])
        data = dict(loaded or {})
    if overrides:
        data = _merge(data, overrides)
    return config_from_mapping(data)
