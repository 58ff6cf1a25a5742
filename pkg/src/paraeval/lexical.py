"""String-matching metric kernels: BLEU (orders 1-4), ROUGE-L, Levenshtein/NLD.

BLEU reproduces the standard detokenized-scoring behavior: clipped n-gram
precision with union-max multi-reference clipping, closest-length effective
reference (ties to the shorter), brevity penalty, and either exponential
sentence-level smoothing or unsmoothed corpus aggregation.
"""
from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .textnorm import TokenSequence

__all__ = [
    "BleuBreakdown",
    "RougeLScore",
    "levenshtein",
    "nld",
    "sentence_bleu",
    "corpus_bleu",
    "rouge_l",
]

MAX_ORDER = 4
_LOG_FLOOR = -9999999999.0


@dataclass(frozen=True)
class BleuBreakdown:
    """Corpus- or sentence-level BLEU with per-order detail.

    ``bleu_n`` holds BLEU-1..BLEU-4 on the 0-100 scale; ``precisions`` holds
    the (possibly smoothed) order-1..4 precisions as fractions.
    """

    bleu_n: tuple[float, float, float, float]
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    @property
    def bleu4(self) -> float:
        return self.bleu_n[3]


@dataclass(frozen=True)
class RougeLScore:
    precision: float
    recall: float
    f: float


def levenshtein(a: str, b: str) -> int:
    """Character-level edit distance (insert / delete / substitute)."""
    return int(kernels.levenshtein_codes(kernels.str_to_codes(a), kernels.str_to_codes(b)))


def nld(a: str, b: str) -> float:
    """Normalized Levenshtein distance in [0, 1].

    Edit distance divided by the longer string's character length; 0 for
    identical strings (including two empty ones), 1 for maximally different.
    Inputs are NFC-normalized, no case folding.
    """
    a = unicodedata.normalize("NFC", a)
    b = unicodedata.normalize("NFC", b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def _ngram_counts(tokens: Sequence[str], max_order: int = MAX_ORDER) -> Counter:
    counts: Counter = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def _closest_ref_len(hyp_len: int, ref_lens: Iterable[int]) -> int:
    closest_diff, closest_len = -1, -1
    for ref_len in ref_lens:
        diff = abs(hyp_len - ref_len)
        if closest_diff == -1 or diff < closest_diff:
            closest_diff, closest_len = diff, ref_len
        elif diff == closest_diff and ref_len < closest_len:
            closest_len = ref_len
    return closest_len


def _pair_stats(hyp: TokenSequence, refs: Sequence[TokenSequence]):
    """Clipped/total n-gram counts and lengths for one (hyp, refs) pair."""
    hyp_tokens = hyp.tokens
    ref_union: dict = {}
    for ref in refs:
        for ngram, count in _ngram_counts(ref.tokens).items():
            if count > ref_union.get(ngram, 0):
                ref_union[ngram] = count
    correct = [0] * MAX_ORDER
    total = [0] * MAX_ORDER
    for ngram, count in _ngram_counts(hyp_tokens).items():
        n = len(ngram) - 1
        total[n] += count
        correct[n] += min(count, ref_union.get(ngram, 0))
    ref_len = _closest_ref_len(len(hyp_tokens), [len(r.tokens) for r in refs])
    return correct, total, len(hyp_tokens), ref_len


def _log_or_floor(p: float) -> float:
    return math.log(p) if p > 0.0 else _LOG_FLOOR

def _score_from_stats(
    correct: Sequence[int],
    total: Sequence[int],
    hyp_len: int,
    ref_len: int,
    smoothing: str,
    effective_order: bool,
) -> BleuBreakdown:
    if hyp_len < ref_len:
        bp = math.exp(1 - ref_len / hyp_len) if hyp_len > 0 else 0.0
    else:
        bp = 1.0

    precisions = [0.0] * MAX_ORDER
    # No matching unigram anywhere means no credit at all, smoothed or not.
    if any(correct):
        smooth_mult = 1.0
        for n in range(MAX_ORDER):
            if total[n] == 0:
                break
            if correct[n] == 0:
                if smoothing == "exp_floor":
                    smooth_mult *= 2.0
                    precisions[n] = 1.0 / (smooth_mult * total[n])
            else:
                precisions[n] = correct[n] / total[n]

    bleu_n = []
    for n in range(1, MAX_ORDER + 1):
        eff = n
        if effective_order:
            eff = sum(1 for i in range(n) if total[i] > 0) or n
        if any(correct[:n]):
            log_sum = sum(_log_or_floor(p) for p in precisions[:eff])
            bleu_n.append(100.0 * bp * math.exp(log_sum / eff))
        else:
            bleu_n.append(0.0)

    return BleuBreakdown(
        bleu_n=tuple(bleu_n),
        precisions=tuple(precisions),
        brevity_penalty=bp,
        hyp_len=hyp_len,
        ref_len=ref_len,
    )


def sentence_bleu(
    hyp: TokenSequence,
    refs: Sequence[TokenSequence],
    smoothing: str = "exp_floor",
) -> BleuBreakdown:
    """BLEU for a single hypothesis against one or more references.

    Uses exponential floor smoothing for zero-match orders and scales the
    geometric mean to the effective order when the hypothesis is shorter
    than four tokens, matching the standard sentence-level scorer.
    """
    if not refs:
        raise ValueError("sentence_bleu needs at least one reference")
    if smoothing not in ("exp_floor", "none"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    correct, total, hyp_len, ref_len = _pair_stats(hyp, refs)
    return _score_from_stats(correct, total, hyp_len, ref_len, smoothing, effective_order=True)


def corpus_bleu(
    pairs: Sequence[tuple[TokenSequence, Sequence[TokenSequence]]],
) -> BleuBreakdown:
    """Micro-averaged corpus BLEU over (hypothesis, references) pairs.

    Counts and lengths are aggregated across the corpus before computing
    precisions and the brevity penalty; no smoothing, so an order with zero
    corpus-wide matches zeroes that BLEU-n.
    """
    if not pairs:
        raise ValueError("corpus_bleu over an empty corpus")
    agg_correct = [0] * MAX_ORDER
    agg_total = [0] * MAX_ORDER
    agg_hyp_len = 0
    agg_ref_len = 0
    for hyp, refs in pairs:
        if not refs:
            raise ValueError("every pair needs at least one reference")
        correct, total, hyp_len, ref_len = _pair_stats(hyp, refs)
        for n in range(MAX_ORDER):
            agg_correct[n] += correct[n]
            agg_total[n] += total[n]
        agg_hyp_len += hyp_len
        agg_ref_len += ref_len
    return _score_from_stats(
        agg_correct, agg_total, agg_hyp_len, agg_ref_len, "none", effective_order=False
    )


def rouge_l(hyp: TokenSequence, ref: TokenSequence) -> RougeLScore:
    """Sentence-level ROUGE-L: LCS precision/recall and their F1."""
    if not hyp.tokens or not ref.tokens:
        return RougeLScore(0.0, 0.0, 0.0)
    hyp_ids, ref_ids = kernels.tokens_to_ids(hyp.tokens, ref.tokens)
    lcs = int(kernels.lcs_codes(hyp_ids, ref_ids))
    precision = lcs / len(hyp.tokens)
    recall = lcs / len(ref.tokens)
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return RougeLScore(precision, recall, f)
