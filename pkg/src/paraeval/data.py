"""Canonical data model and JSONL/TSV formats for corpora, paraphrase sets,
evaluation inputs, human ratings, and multi-target training exports.

All loaders are strict: malformed records fail with the offending line
number, duplicate identifiers are rejected, and unknown fields are carried
through JSONL round-trips untouched (TSV drops them with a warning).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

log = logging.getLogger(__name__)

__all__ = [
    "DatasetError",
    "Utterance",
    "VariantScore",
    "ParaphraseSet",
    "EvalInstance",
    "HumanRating",
    "TrainRecord",
    "load_corpus",
    "save_corpus",
    "load_paraphrases",
    "save_paraphrases",
    "load_instances",
    "save_instances",
    "load_ratings",
    "save_ratings",
    "load_trainset",
    "save_trainset",
    "build_trainset",
]

PathLike = Union[str, Path]

STRATEGIES = ("sequential", "iterative", "sequential_context", "iterative_context")


class DatasetError(Exception):
    """Raised for malformed, inconsistent, or unusable data files."""

    def __init__(self, message: str, path: Optional[PathLike] = None, line: Optional[int] = None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Utterance:
    """One reference sentence tied to its source video and position."""

    id: str
    video_id: str
    index_in_video: int
    text: str
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class VariantScore:
    parascore: float
    bertscore_f1: float
    nld: float


@dataclass(frozen=True)
class ParaphraseSet:
    """Generated variants of one utterance plus provenance and scores."""

    utterance_id: str
    variants: tuple[str, ...]
    generator: str
    strategy: str
    status: str
    scores: Optional[tuple[VariantScore, ...]] = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.status not in ("complete", "missing"):
            raise ValueError(f"bad status {self.status!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"bad strategy {self.strategy!r}")
        if self.scores is not None and len(self.scores) != len(self.variants):
            raise ValueError("scores must parallel variants")

    @property
    def mean_parascore(self) -> Optional[float]:
        if not self.scores:
            return None
        return sum(s.parascore for s in self.scores) / len(self.scores)


@dataclass(frozen=True)
class EvalInstance:
    """A hypothesis with its canonical reference and paraphrase references."""

    id: str
    hypothesis: str
    canonical_reference: str
    paraphrase_references: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.hypothesis.strip() or not self.canonical_reference.strip():
            raise ValueError(f"instance {self.id!r}: hypothesis and reference must be non-empty")

    @property
    def all_references(self) -> tuple[str, ...]:
        return (self.canonical_reference,) + self.paraphrase_references


@dataclass(frozen=True)
class HumanRating:
    instance_id: str
    mean_rating: float
    n_annotators: int
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.mean_rating <= 5.0:
            raise ValueError(f"mean_rating {self.mean_rating} outside [0, 5]")
        if self.n_annotators < 1:
            raise ValueError("n_annotators must be positive")


@dataclass(frozen=True)
class TrainRecord:
    """Training targets for one utterance, canonical reference first."""

    utterance_id: str
    targets: tuple[str, ...]

    def __post_init__(self):
        if not self.targets:
            raise ValueError("a train record needs at least the canonical target")


def _iter_jsonl(path: PathLike):
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"invalid JSON ({e.msg})", path, line_no) from e
            if not isinstance(record, dict):
                raise DatasetError("record is not an object", path, line_no)
            yield line_no, record


def _take(record: dict, key: str, path: PathLike, line_no: int):
    if key not in record:
        raise DatasetError(f"missing field {key!r}", path, line_no)
    return record.pop(key)


def load_corpus(path: PathLike, format: str = "jsonl") -> list[Utterance]:
    """Load utterances sorted by (video_id, index_in_video).

    Rejects duplicate ids, duplicate (video, index) slots, and videos whose
    indices do not form a contiguous 0..n-1 range.
    """
    if format == "jsonl":
        utterances = list(_load_corpus_jsonl(path))
    elif format == "tsv":
        utterances = list(_load_corpus_tsv(path))
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    seen_ids: set[str] = set()
    seen_slots: set[tuple[str, int]] = set()
    for utt in utterances:
        if utt.id in seen_ids:
            raise DatasetError(f"duplicate utterance id {utt.id!r}", path)
        seen_ids.add(utt.id)
        slot = (utt.video_id, utt.index_in_video)
        if slot in seen_slots:
            raise DatasetError(f"duplicate position {slot!r}", path)
        seen_slots.add(slot)

    utterances.sort(key=lambda u: (u.video_id, u.index_in_video))
    expected = 0
    current_video: Optional[str] = None
    for utt in utterances:
        if utt.video_id != current_video:
            current_video, expected = utt.video_id, 0
        if utt.index_in_video != expected:
            raise DatasetError(
                f"video {utt.video_id!r}: indices not contiguous from 0 "
                f"(expected {expected}, got {utt.index_in_video})",
                path,
            )
        expected += 1
    return utterances


def _build_utterance(record: dict, path: PathLike, line_no: int) -> Utterance:
    uid = _take(record, "id", path, line_no)
    video_id = _take(record, "video_id", path, line_no)
    index = _take(record, "index", path, line_no)
    text = _take(record, "text", path, line_no)
    if not isinstance(index, int) or index < 0:
        raise DatasetError(f"index must be a non-negative integer, got {index!r}", path, line_no)
    if not str(text).strip():
        raise DatasetError("text is empty", path, line_no)
    return Utterance(
        id=str(uid), video_id=str(video_id), index_in_video=index, text=str(text), extra=record
    )


def _load_corpus_jsonl(path: PathLike) -> Iterable[Utterance]:
    for line_no, record in _iter_jsonl(path):
        yield _build_utterance(record, path, line_no)


def _load_corpus_tsv(path: PathLike) -> Iterable[Utterance]:
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 4:
                raise DatasetError(
                    f"expected 4 tab-separated fields (id, video_id, index, text), got {len(parts)}",
                    path,
                    line_no,
                )
            if len(parts) > 4:
                log.warning("%s:%d: dropping %d extra TSV fields", path, line_no, len(parts) - 4)
            uid, video_id, index_text, text = parts[:4]
            try:
                index = int(index_text)
            except ValueError:
                raise DatasetError(f"index is not an integer: {index_text!r}", path, line_no)
            record = {"id": uid, "video_id": video_id, "index": index, "text": text}
            yield _build_utterance(record, path, line_no)


def save_corpus(utterances: Sequence[Utterance], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for utt in utterances:
            record = {
                "id": utt.id,
                "video_id": utt.video_id,
                "index": utt.index_in_video,
                "text": utt.text,
            }
            record.update(utt.extra)
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def save_paraphrases(sets: Sequence[ParaphraseSet], path: PathLike, append: bool = False) -> None:
    """Write one JSONL record per set; round-trips losslessly through load."""
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as f:
        for ps in sets:
            f.write(json.dumps(paraphrase_set_record(ps), ensure_ascii=False) + "\n")


def paraphrase_set_record(ps: ParaphraseSet) -> dict:
    record = {
        "utterance_id": ps.utterance_id,
        "generator": ps.generator,
        "strategy": ps.strategy,
        "status": ps.status,
        "variants": list(ps.variants),
    }
    if ps.scores is not None:
        record["scores"] = [
            {"parascore": s.parascore, "bertscore_f1": s.bertscore_f1, "nld": s.nld}
            for s in ps.scores
        ]
    record.update(ps.extra)
    return record


def load_paraphrases(path: PathLike) -> list[ParaphraseSet]:
    sets = []
    for line_no, record in _iter_jsonl(path):
        utterance_id = _take(record, "utterance_id", path, line_no)
        generator = _take(record, "generator", path, line_no)
        strategy = _take(record, "strategy", path, line_no)
        status = _take(record, "status", path, line_no)
        variants = _take(record, "variants", path, line_no)
        scores = None
        if "scores" in record:
            raw_scores = record.pop("scores")
            try:
                scores = tuple(
                    VariantScore(
                        parascore=float(s["parascore"]),
                        bertscore_f1=float(s["bertscore_f1"]),
                        nld=float(s["nld"]),
                    )
                    for s in raw_scores
                )
            except (KeyError, TypeError) as e:
                raise DatasetError(f"malformed scores: {e}", path, line_no) from e
        try:
            ps = ParaphraseSet(
                utterance_id=str(utterance_id),
                variants=tuple(str(v) for v in variants),
                generator=str(generator),
                strategy=str(strategy),
                status=str(status),
                scores=scores,
                extra=record,
            )
        except ValueError as e:
            raise DatasetError(str(e), path, line_no) from e
        sets.append(ps)
    return sets


def save_instances(instances: Sequence[EvalInstance], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for inst in instances:
            record = {
                "id": inst.id,
                "hypothesis": inst.hypothesis,
                "reference": inst.canonical_reference,
                "paraphrases": list(inst.paraphrase_references),
            }
            record.update(inst.extra)
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_instances(path: PathLike) -> list[EvalInstance]:
    instances = []
    seen: set[str] = set()
    for line_no, record in _iter_jsonl(path):
        iid = _take(record, "id", path, line_no)
        hypothesis = _take(record, "hypothesis", path, line_no)
        reference = _take(record, "reference", path, line_no)
        paraphrases = record.pop("paraphrases", [])
        try:
            inst = EvalInstance(
                id=str(iid),
                hypothesis=str(hypothesis),
                canonical_reference=str(reference),
                paraphrase_references=tuple(str(p) for p in paraphrases),
                extra=record,
            )
        except ValueError as e:
            raise DatasetError(str(e), path, line_no) from e
        if inst.id in seen:
            raise DatasetError(f"duplicate instance id {inst.id!r}", path, line_no)
        seen.add(inst.id)
        instances.append(inst)
    return instances


def save_ratings(ratings: Sequence[HumanRating], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in ratings:
            record = {
                "instance_id": r.instance_id,
                "mean_rating": r.mean_rating,
                "n_annotators": r.n_annotators,
            }
            record.update(r.extra)
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_ratings(path: PathLike) -> list[HumanRating]:
    ratings = []
    for line_no, record in _iter_jsonl(path):
        instance_id = _take(record, "instance_id", path, line_no)
        mean_rating = _take(record, "mean_rating", path, line_no)
        n_annotators = _take(record, "n_annotators", path, line_no)
        try:
            ratings.append(
                HumanRating(
                    instance_id=str(instance_id),
                    mean_rating=float(mean_rating),
                    n_annotators=int(n_annotators),
                    extra=record,
                )
            )
        except ValueError as e:
            raise DatasetError(str(e), path, line_no) from e
    return ratings


def save_trainset(records: Sequence[TrainRecord], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(
                json.dumps(
                    {"utterance_id": rec.utterance_id, "targets": list(rec.targets)},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_trainset(path: PathLike) -> list[TrainRecord]:
    records = []
    for line_no, record in _iter_jsonl(path):
        utterance_id = _take(record, "utterance_id", path, line_no)
        targets = _take(record, "targets", path, line_no)
        try:
            records.append(
                TrainRecord(utterance_id=str(utterance_id), targets=tuple(str(t) for t in targets))
            )
        except ValueError as e:
            raise DatasetError(str(e), path, line_no) from e
    return records


def build_trainset(
    corpus: Sequence[Utterance],
    sets: Sequence[ParaphraseSet],
    threshold: float,
) -> list[TrainRecord]:
    """Emit per-utterance target lists: the canonical reference first, then
    every variant whose parascore clears ``threshold`` (inclusive), in
    variant order. Utterances with no usable set keep a single target.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    by_utterance = {ps.utterance_id: ps for ps in sets}
    records = []
    for utt in corpus:
        targets = [utt.text]
        ps = by_utterance.get(utt.id)
        if ps is not None and ps.status == "complete" and ps.variants:
            if ps.scores is None:
                if threshold > 0.0:
                    raise DatasetError(
                        f"utterance {utt.id!r}: variants are unscored; "
                        "score the paraphrase file before thresholding"
                    )
                targets.extend(ps.variants)
            else:
                targets.extend(
                    v for v, s in zip(ps.variants, ps.scores) if s.parascore >= threshold
                )
        records.append(TrainRecord(utterance_id=utt.id, targets=tuple(targets)))
    return records
