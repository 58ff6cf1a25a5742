"""Paraphrase quality scoring: semantic similarity plus capped lexical
divergence, per-set scoring, threshold filtering, and distribution exports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .data import ParaphraseSet, Utterance, VariantScore
from .lexical import nld
from .semantic import EmbeddingProvider, embed, greedy_bertscore

__all__ = [
    "ParaScoreConfig",
    "DistributionSummary",
    "combine",
    "parascore",
    "score_set",
    "filter_threshold",
    "summarize",
    "write_distribution_csv",
]

DEFAULT_GAMMA = 0.35
DEFAULT_OMEGA = 0.5
DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class ParaScoreConfig:
    """Weights for the combined score.

    ``gamma`` caps the divergence contribution (edit distances above that
    fraction of the longer string count the same); ``omega`` weights it.
    With the defaults the normalizing denominator is exactly 1.175.
    """

    gamma: float = DEFAULT_GAMMA
    omega: float = DEFAULT_OMEGA
    threshold: float = DEFAULT_THRESHOLD
    provider_identity: str = ""

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma {self.gamma} outside (0, 1]")
        if self.omega < 0.0:
            raise ValueError(f"omega {self.omega} must be >= 0")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")

    @property
    def denominator(self) -> float:
        return 1.0 + self.omega * self.gamma


def combine(bertscore_f1: float, nld_value: float, cfg: ParaScoreConfig = ParaScoreConfig()) -> float:
    """Fold semantic similarity and capped divergence into one score."""
    return (bertscore_f1 + cfg.omega * min(nld_value, cfg.gamma)) / cfg.denominator


def parascore(
    x: str,
    x_hat: str,
    cfg: ParaScoreConfig = ParaScoreConfig(),
    provider: EmbeddingProvider = None,
) -> VariantScore:
    """Score candidate ``x_hat`` against original ``x``.

    Returns the combined value together with its raw components so the
    combination stays recomputable from persisted records.
    """
    if not x or not x_hat:
        raise ValueError("parascore needs non-empty inputs")
    if provider is None:
        raise ValueError("parascore needs an embedding provider")
    f1 = greedy_bertscore(embed(provider, x), embed(provider, x_hat)).f1
    divergence = nld(x, x_hat)
    return VariantScore(
        parascore=combine(f1, divergence, cfg),
        bertscore_f1=f1,
        nld=divergence,
    )


def score_set(
    utt: Utterance,
    ps: ParaphraseSet,
    cfg: ParaScoreConfig = ParaScoreConfig(),
    provider: EmbeddingProvider = None,
) -> ParaphraseSet:
    """Score every variant of a complete set against its utterance text."""
    if ps.status != "complete" or not ps.variants:
        raise ValueError(f"set for {ps.utterance_id!r} is not complete; nothing to score")
    if ps.utterance_id != utt.id:
        raise ValueError(f"set belongs to {ps.utterance_id!r}, not {utt.id!r}")
    scores = []
    for i, variant in enumerate(ps.variants):
        try:
            scores.append(parascore(utt.text, variant, cfg, provider))
        except Exception as e:
            raise RuntimeError(
                f"scoring variant {i} of utterance {utt.id!r} failed: {e}"
            ) from e
    return replace(ps, scores=tuple(scores))


def filter_threshold(ps: ParaphraseSet, threshold: float) -> list[tuple[int, str]]:
    """Indices and texts of variants at or above ``threshold``, stable order."""
    if ps.scores is None:
        raise ValueError(f"set for {ps.utterance_id!r} is unscored")
    return [
        (i, v) for i, (v, s) in enumerate(zip(ps.variants, ps.scores)) if s.parascore >= threshold
    ]


@dataclass(frozen=True)
class DistributionSummary:
    count: int
    mean: float
    std: float
    histogram: tuple[tuple[float, float, int], ...]
    percentiles: dict[float, float]


def summarize(scores: Sequence[float], bin_width: float = 0.02) -> DistributionSummary:
    """Fixed-bin histogram plus moments and quartiles of a score sample.

    Standard deviation is the population form; percentiles interpolate
    linearly between order statistics.
    """
    if len(scores) == 0:
        raise ValueError("cannot summarize an empty score list")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    values = np.asarray(scores, dtype=np.float64)
    lo = float(values.min())
    hi = float(values.max())
    n_bins = max(1, math.ceil((hi - lo) / bin_width - 1e-12))
    idx = np.minimum(((values - lo) / bin_width).astype(int), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    histogram = tuple(
        (lo + i * bin_width, lo + (i + 1) * bin_width, int(c)) for i, c in enumerate(counts)
    )
    p25, p50, p75 = np.percentile(values, [25, 50, 75])
    return DistributionSummary(
        count=len(values),
        mean=float(values.mean()),
        std=float(values.std()),
        histogram=histogram,
        percentiles={0.25: float(p25), 0.50: float(p50), 0.75: float(p75)},
    )


def write_distribution_csv(summary: DistributionSummary, path: Union[str, Path]) -> None:
    """Histogram rows plus a trailing summary line, ready for plotting."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("bin_start,bin_end,count\n")
        for start, end, count in summary.histogram:
            f.write(f"{start:.6f},{end:.6f},{count}\n")
        f.write("mean,std,p25,p50,p75,count\n")
        f.write(
            f"{summary.mean:.6f},{summary.std:.6f},"
            f"{summary.percentiles[0.25]:.6f},{summary.percentiles[0.50]:.6f},"
            f"{summary.percentiles[0.75]:.6f},{summary.count}\n"
        )
