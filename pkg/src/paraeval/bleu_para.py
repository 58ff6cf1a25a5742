"""Paraphrase-aware evaluation: per-instance best-reference selection and
corpus aggregation, generalized over any per-sentence selector metric.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .data import EvalInstance
from .lexical import BleuBreakdown, corpus_bleu, rouge_l, sentence_bleu
from .textnorm import tokenize_13a

__all__ = [
    "SelectionResult",
    "EvalReport",
    "sentence_bleu4",
    "select_best_reference",
    "bleu_para_corpus",
    "eval_no_paraphrases",
    "format_report_table",
]

SelectorMetric = Callable[[str, str], float]


def sentence_bleu4(hypothesis: str, reference: str) -> float:
    """Smoothed sentence BLEU-4 on 13a tokens; the default selector."""
    return sentence_bleu(tokenize_13a(hypothesis), [tokenize_13a(reference)]).bleu4


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of scoring one hypothesis against its reference pool.

    Index 0 is the canonical reference; ties resolve to the lowest index,
    so the canonical reference wins them.
    """

    instance_id: str
    chosen_index: int
    chosen_score: float
    per_reference_scores: tuple[float, ...]


@dataclass(frozen=True)
class EvalReport:
    mode: str  # "no_paraphrases" | "with_paraphrases"
    bleu: BleuBreakdown
    rouge_l: float
    selections: Optional[tuple[SelectionResult, ...]] = None

    def to_record(self) -> dict:
        return {
            "mode": self.mode,
            "bleu": [round(b, 6) for b in self.bleu.bleu_n],
            "rouge_l": round(self.rouge_l, 6),
        }


def select_best_reference(
    hyp: str,
    refs: Sequence[str],
    selector_metric: SelectorMetric = sentence_bleu4,
    instance_id: str = "",
) -> SelectionResult:
    """Score each reference independently and keep the best one."""
    if not refs:
        raise ValueError("select_best_reference needs at least one reference")
    scores = tuple(selector_metric(hyp, ref) for ref in refs)
    best_index = 0
    for i, score in enumerate(scores):
        if score > scores[best_index]:
            best_index = i
    return SelectionResult(
        instance_id=instance_id,
        chosen_index=best_index,
        chosen_score=scores[best_index],
        per_reference_scores=scores,
    )


def _best_rouge_f(inst: EvalInstance) -> float:
    hyp_tokens = tokenize_13a(inst.hypothesis)
    return max(rouge_l(hyp_tokens, tokenize_13a(ref)).f for ref in inst.all_references)


def bleu_para_corpus(
    instances: Sequence[EvalInstance],
    mode: str = "select_best",
    selector_metric: SelectorMetric = sentence_bleu4,
) -> EvalReport:
    """Corpus evaluation with the paraphrase pool in play.

    ``select_best`` picks each instance's highest-scoring reference with the
    selector metric, then reports corpus BLEU over the chosen references;
    ``multi_ref`` reports classical multi-reference corpus BLEU over the
    whole pool. ROUGE-L is always the mean of per-instance best F.
    """
    if not instances:
        raise ValueError("empty instance list")
    if mode not in ("select_best", "multi_ref"):
        raise ValueError(f"unknown mode {mode!r}")

    selections = tuple(
        select_best_reference(
            inst.hypothesis, inst.all_references, selector_metric, instance_id=inst.id
        )
        for inst in instances
    )
    if mode == "select_best":
        pairs = [
            (tokenize_13a(inst.hypothesis), [tokenize_13a(inst.all_references[sel.chosen_index])])
            for inst, sel in zip(instances, selections)
        ]
    else:
        pairs = [
            (tokenize_13a(inst.hypothesis), [tokenize_13a(r) for r in inst.all_references])
            for inst in instances
        ]
    bleu = corpus_bleu(pairs)
    rouge_mean = sum(_best_rouge_f(inst) for inst in instances) / len(instances)
    return EvalReport(
        mode="with_paraphrases", bleu=bleu, rouge_l=rouge_mean, selections=selections
    )


def eval_no_paraphrases(instances: Sequence[EvalInstance]) -> EvalReport:
    """Baseline evaluation against canonical references only."""
    if not instances:
        raise ValueError("empty instance list")
    pairs = [
        (tokenize_13a(inst.hypothesis), [tokenize_13a(inst.canonical_reference)])
        for inst in instances
    ]
    bleu = corpus_bleu(pairs)
    rouge_mean = sum(
        rouge_l(tokenize_13a(inst.hypothesis), tokenize_13a(inst.canonical_reference)).f
        for inst in instances
    ) / len(instances)
    return EvalReport(mode="no_paraphrases", bleu=bleu, rouge_l=rouge_mean)


def format_report_table(reports: Sequence[EvalReport]) -> str:
    lines = [
        f"{'mode':<20} {'BLEU-1':>8} {'BLEU-2':>8} {'BLEU-3':>8} {'BLEU-4':>8} {'ROUGE-L':>8}"
    ]
    for report in reports:
        b = report.bleu.bleu_n
        lines.append(
            f"{report.mode:<20} {b[0]:>8.2f} {b[1]:>8.2f} {b[2]:>8.2f} {b[3]:>8.2f}"
            f" {report.rouge_l:>8.4f}"
        )
    return "\n".join(lines)
