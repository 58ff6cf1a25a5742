"""Meta-evaluation of metrics against human ratings: Pearson and Spearman
agreement, the extremes subset, and the per-metric report rows.

Degenerate inputs (constant vectors, undersized subsets) raise instead of
returning NaN so batch pipelines fail loudly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import HumanRating

__all__ = [
    "CorrelationReport",
    "pearson",
    "spearman",
    "average_ranks",
    "extremes_subset",
    "correlate",
]

EXTREMES_LOW = 5.0
EXTREMES_HIGH = 15.0


@dataclass(frozen=True)
class CorrelationReport:
    metric_name: str
    pearson_r: float
    spearman_rho: float
    n: int
    subset: str  # "all" | "extremes"


def _check_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least two points")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        raise ValueError("correlation is undefined for a constant input")
    return xa, ya


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xa, ya = _check_pair(x, y)
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    return float((xd * yd).sum() / np.sqrt((xd * xd).sum() * (yd * yd).sum()))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; ties receive the mean of the positions they occupy."""
    a = np.asarray(values, dtype=np.float64)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(len(a), dtype=np.float64)
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    xa, ya = _check_pair(x, y)
    return pearson(average_ranks(xa), average_ranks(ya))


def extremes_subset(
    items: Sequence[tuple[str, float]],
    low: float = EXTREMES_LOW,
    high: float = EXTREMES_HIGH,
) -> list[str]:
    """Ids whose canonical BLEU is strictly below ``low`` or above ``high``."""
    if not low < high:
        raise ValueError(f"low {low} must be < high {high}")
    return [item_id for item_id, score in items if score < low or score > high]


def correlate(
    ratings: Sequence[HumanRating],
    metric_scores: Mapping[str, float],
    metric_name: str = "metric",
    subset: Optional[Sequence[str]] = None,
) -> CorrelationReport:
    """Align ratings with metric scores by id and report both correlations."""
    missing = [r.instance_id for r in ratings if r.instance_id not in metric_scores]
    if missing:
        raise KeyError(f"no metric score for rated ids: {missing[:5]}" +
                       (f" (+{len(missing) - 5} more)" if len(missing) > 5 else ""))
    subset_label = "all"
    selected = list(ratings)
    if subset is not None:
        wanted = set(subset)
        selected = [r for r in selected if r.instance_id in wanted]
        subset_label = "extremes"
    if len(selected) < 2:
        raise ValueError(f"subset too small to correlate (n={len(selected)})")
    human = [r.mean_rating for r in selected]
    scores = [metric_scores[r.instance_id] for r in selected]
    return CorrelationReport(
        metric_name=metric_name,
        pearson_r=pearson(human, scores),
        spearman_rho=spearman(human, scores),
        n=len(selected),
        subset=subset_label,
    )
