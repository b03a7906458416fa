"""The eight change-detection metrics and the average-ranking procedures.

An undefined metric (zero denominator) is represented by ``None`` and ranks
strictly worse than every defined value.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Mapping

import numpy as np
from scipy.stats import rankdata

METRIC_NAMES = ("Re", "Sp", "FPR", "FNR", "WCR", "CCR", "Pr", "F1")

ASCENDING, DESCENDING = "ascending", "descending"

# Sort direction that puts the best value first.
DIRECTIONS: dict[str, str] = {
    "Re": DESCENDING,
    "Sp": DESCENDING,
    "FPR": ASCENDING,
    "FNR": ASCENDING,
    "WCR": ASCENDING,
    "CCR": DESCENDING,
    "Pr": DESCENDING,
    "F1": DESCENDING,
}


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


def accumulate(parts: Iterable[Confusion]) -> Confusion:
    total = Confusion()
    for part in parts:
        total = total + part
    return total


@dataclass(frozen=True)
class MetricSet:
    Re: float | None = None
    Sp: float | None = None
    FPR: float | None = None
    FNR: float | None = None
    WCR: float | None = None
    CCR: float | None = None
    Pr: float | None = None
    F1: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(c: Confusion) -> MetricSet:
    total = c.total
    re = _ratio(c.tp, c.tp + c.fn)
    pr = _ratio(c.tp, c.tp + c.fp)
    if re is None or pr is None or pr + re == 0:
        f1 = None
    else:
        f1 = 2 * pr * re / (pr + re)
    return MetricSet(
        Re=re,
        Sp=_ratio(c.tn, c.tn + c.fp),
        FPR=_ratio(c.fp, c.fp + c.tn),
        FNR=_ratio(c.fn, c.fn + c.tp),
        WCR=_ratio(c.fn + c.fp, total),
        CCR=_ratio(c.tp + c.tn, total),
        Pr=pr,
        F1=f1,
    )


def mean_metrics(sets: Iterable[MetricSet]) -> MetricSet:
    """Per-metric mean over the sets where that metric is defined."""
    sets = list(sets)
    values = {}
    for name in METRIC_NAMES:
        defined = [getattr(s, name) for s in sets if getattr(s, name) is not None]
        values[name] = float(np.mean(defined)) if defined else None
    return MetricSet(**values)


@dataclass
class RankTable:
    """Per-metric ranks (1 = best, ties share the mean rank) and their mean ``R``."""

    methods: list[str]
    ranks: dict[str, list[float]] = field(default_factory=dict)
    average: dict[str, float] = field(default_factory=dict)

    def rank_of(self, method: str, metric: str) -> float:
        return self.ranks[metric][self.methods.index(method)]

    def ordered(self) -> list[tuple[str, float]]:
        """Methods sorted by ``R``, best first (stable on ties)."""
        return sorted(self.average.items(), key=lambda kv: kv[1])


def rank_metric(values: list[float | None], direction: str) -> np.ndarray:
    keys = np.array(
        [np.inf if v is None else (-v if direction == DESCENDING else v) for v in values],
        dtype=np.float64,
    )
    return rankdata(keys, method="average")


def rank_methods(
    per_method: Mapping[str, MetricSet], directions: Mapping[str, str] = DIRECTIONS
) -> RankTable:
    if not per_method:
        raise ValueError("rank_methods needs at least one method")
    methods = list(per_method)
    table = RankTable(methods)
    for name in METRIC_NAMES:
        values = [getattr(per_method[m], name) for m in methods]
        table.ranks[name] = [float(r) for r in rank_metric(values, directions[name])]
    for i, method in enumerate(methods):
        table.average[method] = float(np.mean([table.ranks[n][i] for n in METRIC_NAMES]))
    return table


def rank_across_categories(per_category: Mapping[str, RankTable] | Iterable[RankTable]) -> dict[str, float]:
    """``RC``: each method's mean of its per-category ``R``."""
    tables = list(per_category.values()) if isinstance(per_category, Mapping) else list(per_category)
    if not tables:
        raise ValueError("rank_across_categories needs at least one category")
    methods: list[str] = []
    for t in tables:
        methods.extend(m for m in t.methods if m not in methods)
    for t in tables:
        missing = [m for m in methods if m not in t.average]
        if missing:
            raise ValueError(f"methods missing from a category: {', '.join(missing)}")
    return {m: float(np.mean([t.average[m] for t in tables])) for m in methods}
