"""LLM paraphrase generation: prompt construction, sequential/iterative
strategies, optional preceding-sentence context, and the corpus driver
with bounded concurrency and resume.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union

from .data import ParaphraseSet, Utterance, paraphrase_set_record
from .textnorm import normalize_generation

log = logging.getLogger(__name__)

__all__ = [
    "GenerationConfig",
    "PromptEnvelope",
    "ChatClient",
    "ChatTransportError",
    "GenerationAborted",
    "OpenAIChatClient",
    "build_prompt",
    "context_window",
    "generate_set",
    "run_generation",
]


@dataclass(frozen=True)
class GenerationConfig:
    k: int = 5
    temperature: float = 0.7
    top_p: float = 0.95
    strategy: str = "sequential"  # or "iterative"
    context_size: int = 0  # preceding sentences; 0 = sentence-only
    model: str = ""
    endpoint: str = ""
    max_retries: int = 0
    request_timeout: float = 30.0
    max_in_flight: int = 4
    fail_streak_limit: int = 5
    seed: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.top_p <= 1.0:
            raise ValueError("top_p must be in (0, 1]")
        if self.temperature < 0.0:
            raise ValueError("temperature must be >= 0")
        if self.strategy not in ("sequential", "iterative"):
            raise ValueError(f"bad strategy {self.strategy!r}")
        if self.context_size < 0 or self.max_retries < 0:
            raise ValueError("context_size and max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    @property
    def effective_strategy(self) -> str:
        if self.context_size > 0:
            return f"{self.strategy}_context"
        return self.strategy


@dataclass(frozen=True)
class PromptEnvelope:
    system_text: str
    user_text: str


class ChatTransportError(Exception):
    """No usable response from the chat endpoint (network, HTTP, shape)."""


class GenerationAborted(Exception):
    """Too many consecutive transport failures; the run was stopped."""


class ChatClient(Protocol):
    def complete(self, prompt: PromptEnvelope, cfg: GenerationConfig) -> str: ...


_SYSTEM_TEXT = "You are a helpful assistant."

_SEQUENTIAL_TEMPLATE = (
    "You are a helpful assistant that rephrases a given sentence in {k} ways, "
    "each on its own line. Try to be semantically consistent and output nothing "
    "else than these sentences. Sentence: {sentence} Paraphrases:"
)

_ITERATIVE_TEMPLATE = (
    "You are a helpful assistant that rephrases a given sentence. Provide "
    "exactly one paraphrase on a single line. Try to be semantically consistent "
    "and output nothing else than that sentence.{priors} "
    "Sentence: {sentence} Paraphrase:"
)


def build_prompt(
    sentence: str,
    cfg: GenerationConfig,
    context: Sequence[str] = (),
    prior_variants: Sequence[str] = (),
) -> PromptEnvelope:
    """Render the instruction for one generation call.

    Sequential prompts request all k rewrites at once; iterative prompts
    request a single new rewrite and list the ones produced so far. When
    context sentences are given they are prepended in a ``Context:`` block,
    leaving the target sentence untouched.
    """
    if not sentence:
        raise ValueError("cannot build a prompt for an empty sentence")
    if len(context) > cfg.context_size:
        raise ValueError(f"{len(context)} context sentences but context_size={cfg.context_size}")
    if cfg.strategy == "sequential":
        body = _SEQUENTIAL_TEMPLATE.format(k=cfg.k, sentence=sentence)
    else:
        priors = ""
        if prior_variants:
            listed = "\n".join(f"{i + 1}. {p}" for i, p in enumerate(prior_variants))
            priors = (
                f" You already produced these paraphrases, do not repeat them:\n{listed}\n"
            )
        body = _ITERATIVE_TEMPLATE.format(priors=priors, sentence=sentence)
    if context:
        context_block = "Context:\n" + "\n".join(context) + "\n"
        body = context_block + body
    return PromptEnvelope(system_text=_SYSTEM_TEXT, user_text=body)


def context_window(
    corpus: Sequence[Utterance], target: Utterance, m: int
) -> list[str]:
    """Texts of up to ``m`` utterances immediately preceding ``target`` in
    the same video; never crosses a video boundary.
    """
    by_slot = {(u.video_id, u.index_in_video): u for u in corpus}
    if by_slot.get((target.video_id, target.index_in_video)) != target:
        raise ValueError(f"target {target.id!r} not found in corpus")
    start = max(0, target.index_in_video - m)
    return [
        by_slot[(target.video_id, i)].text
        for i in range(start, target.index_in_video)
        if (target.video_id, i) in by_slot
    ]


class OpenAIChatClient:
    """Chat-completions client for any OpenAI-compatible endpoint."""

    def __init__(self, endpoint: str, api_key: Optional[str] = None):
        self._endpoint = endpoint
        self._api_key = api_key

    def complete(self, prompt: PromptEnvelope, cfg: GenerationConfig) -> str:
        import requests

        payload = {
            "model": cfg.model,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
        }
        if cfg.seed is not None:
            payload["seed"] = cfg.seed
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            resp = requests.post(
                self._endpoint, json=payload, headers=headers, timeout=cfg.request_timeout
            )
        except requests.RequestException as e:
            raise ChatTransportError(f"request failed: {e}") from e
        if resp.status_code != 200:
            raise ChatTransportError(f"endpoint returned HTTP {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise ChatTransportError(f"malformed completion response: {e}") from e


def _attempt_loop(call, max_retries: int):
    """Run ``call`` up to 1 + max_retries times.

    Returns the first non-None result; None means every attempt produced a
    well-formed but wrongly shaped response. Transport errors only propagate
    once the attempt budget is spent.
    """
    last_transport: Optional[ChatTransportError] = None
    for _ in range(1 + max_retries):
        try:
            result = call()
        except ChatTransportError as e:
            last_transport = e
            continue
        if result is not None:
            return result
        last_transport = None
    if last_transport is not None:
        raise last_transport
    return None


def generate_set(
    utt: Utterance,
    cfg: GenerationConfig,
    client: ChatClient,
    context: Sequence[str] = (),
) -> ParaphraseSet:
    """Produce one paraphrase set for an utterance.

    A response that does not normalize to exactly k usable lines is retried
    up to ``max_retries`` times and then recorded as missing; transport
    failures that outlast the retry budget raise instead.
    """
    if cfg.strategy == "sequential":
        def attempt():
            raw = client.complete(build_prompt(utt.text, cfg, context), cfg)
            return normalize_generation(raw, cfg.k)

        variants = _attempt_loop(attempt, cfg.max_retries)
    else:
        variants = []
        for _ in range(cfg.k):
            def attempt(priors=tuple(variants)):
                raw = client.complete(
                    build_prompt(utt.text, cfg, context, prior_variants=priors), cfg
                )
                lines = normalize_generation(raw, 1)
                return lines[0] if lines else None

            one = _attempt_loop(attempt, cfg.max_retries)
            if one is None:
                variants = None
                break
            variants.append(one)

    if variants is None:
        return ParaphraseSet(
            utterance_id=utt.id,
            variants=(),
            generator=cfg.model,
            strategy=cfg.effective_strategy,
            status="missing",
        )
    return ParaphraseSet(
        utterance_id=utt.id,
        variants=tuple(variants),
        generator=cfg.model,
        strategy=cfg.effective_strategy,
        status="complete",
    )


@dataclass
class GenerationStats:
    complete: int = 0
    missing: int = 0
    failed: int = 0
    skipped: int = 0

    @property
    def new(self) -> int:
        return self.complete + self.missing


def _load_done_ids(path: Union[str, Path]) -> set[str]:
    done = set()
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    done.add(json.loads(line)["utterance_id"])
    except FileNotFoundError:
        pass
    return done


def run_generation(
    corpus: Sequence[Utterance],
    cfg: GenerationConfig,
    client: ChatClient,
    resume_path: Union[str, Path],
    failure_path: Optional[Union[str, Path]] = None,
    limit: Optional[int] = None,
) -> GenerationStats:
    """Generate paraphrase sets for a whole corpus, appending each finished
    set to ``resume_path`` as it completes.

    Utterance ids already present in the output are skipped, so reruns only
    work on the remainder. Permanently failed utterances go to a sidecar
    log; the run aborts after ``fail_streak_limit`` consecutive transport
    failures.
    """
    failure_path = failure_path or str(resume_path) + ".failures.jsonl"
    done = _load_done_ids(resume_path)
    pending = [u for u in corpus if u.id not in done]
    if limit is not None:
        pending = pending[:limit]
    stats = GenerationStats(skipped=len(done))

    contexts = {}
    if cfg.context_size > 0:
        for utt in pending:
            contexts[utt.id] = context_window(corpus, utt, cfg.context_size)

    # completions are drained (and persisted) by this thread only
    streak = 0

    def worker(utt: Utterance) -> ParaphraseSet:
        return generate_set(utt, cfg, client, contexts.get(utt.id, ()))

    with open(resume_path, "a", encoding="utf-8") as out_f, open(
        failure_path, "a", encoding="utf-8"
    ) as fail_f:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            futures = {pool.submit(worker, utt): utt for utt in pending}
            try:
                for future in as_completed(futures):
                    utt = futures[future]
                    try:
                        ps = future.result()
                    except ChatTransportError as e:
                        streak += 1
                        stats.failed += 1
                        fail_f.write(
                            json.dumps(
                                {
                                    "utterance_id": utt.id,
                                    "error": str(e),
                                    "attempts": 1 + cfg.max_retries,
                                }
                            )
                            + "\n"
                        )
                        fail_f.flush()
                        if streak >= cfg.fail_streak_limit:
                            raise GenerationAborted(
                                f"{streak} consecutive transport failures, giving up"
                            ) from e
                        continue
                    streak = 0
                    if ps.status == "complete":
                        stats.complete += 1
                    else:
                        stats.missing += 1
                    out_f.write(json.dumps(paraphrase_set_record(ps), ensure_ascii=False) + "\n")
                    out_f.flush()
            finally:
                for future in futures:
                    future.cancel()
    return stats
