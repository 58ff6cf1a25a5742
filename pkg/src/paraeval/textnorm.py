"""Tokenization for lexical metrics and cleanup of raw LLM generations."""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["TokenSequence", "tokenize_13a", "word_count", "normalize_generation"]


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_text: str = field(compare=False, default="")

    def __len__(self) -> int:
        return len(self.tokens)

    def joined(self) -> str:
        return " ".join(self.tokens)


# mteval-v13a punctuation handling, assuming Western languages:
# isolate most ASCII punctuation, keep period/comma/dash glued to digits.
_PUNCT_RE = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_PERIOD_COMMA_BEFORE = re.compile(r"([^0-9])([\.,])")
_PERIOD_COMMA_AFTER = re.compile(r"([\.,])([^0-9])")
_DIGIT_DASH = re.compile(r"([0-9])(-)")


def tokenize_13a(text: str) -> TokenSequence:
    """Tokenize with the WMT "13a" scheme used by the standard BLEU scorers.

    Deterministic and idempotent on already-tokenized text; empty input
    yields an empty sequence.
    """
    norm = text
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    if "&" in norm:
        norm = norm.replace("&quot;", '"')
        norm = norm.replace("&amp;", "&")
        norm = norm.replace("&lt;", "<")
        norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    norm = _PUNCT_RE.sub(r" \1 ", norm)
    norm = _PERIOD_COMMA_BEFORE.sub(r"\1 \2 ", norm)
    norm = _PERIOD_COMMA_AFTER.sub(r" \1 \2", norm)
    norm = _DIGIT_DASH.sub(r"\1 \2 ", norm)
    return TokenSequence(tokens=tuple(norm.split()), source_text=text)


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


# Lines that are instruction echo rather than content. A line is boilerplate
# if it ends with ":" or starts (case-insensitively) with one of these.
_BOILERPLATE_PREFIXES = (
    "here are",
    "here is",
    "sure",
    "paraphrases",
    "of course",
    "certainly",
)

# Leading bullets and enumerators: "-", "*", "•", "1." / "1)", "a." / "a)".
_ENUM_MARKER_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)]|[a-z][.)])\s+", re.IGNORECASE)

_QUOTE_PAIRS = [
    ('"', '"'),
    ("'", "'"),
    ("“", "”"),
    ("‘", "’"),
    ("«", "»"),
]

MIN_WORDS = 4
MAX_WORDS = 30


def _strip_outer_quotes(line: str) -> str:
    for opener, closer in _QUOTE_PAIRS:
        if len(line) >= 2 and line.startswith(opener) and line.endswith(closer):
            return line[1:-1].strip()
    return line


def _is_boilerplate(line: str) -> bool:
    if line.endswith(":"):
        return True
    lowered = line.lower()
    return any(lowered.startswith(p) for p in _BOILERPLATE_PREFIXES)


def normalize_generation(raw: str, k_expected: int) -> Optional[list[str]]:
    """Reduce a raw model response to exactly ``k_expected`` clean lines.

    Drops empty and boilerplate lines, strips enumeration markers and outer
    quotes, and discards lines outside the 4-30 word band. Returns ``None``
    (a missing generation, not an error) unless exactly ``k_expected``
    usable lines remain.
    """
    if k_expected < 1:
        raise ValueError("k_expected must be >= 1")
    kept: list[str] = []
    for line in unicodedata.normalize("NFC", raw).split("\n"):
        line = line.strip()
        if not line:
            continue
        if _is_boilerplate(line):
            continue
        line = _ENUM_MARKER_RE.sub("", line).strip()
        line = _strip_outer_quotes(line)
        if not line:
            continue
        if not MIN_WORDS <= word_count(line) <= MAX_WORDS:
            continue
        kept.append(line)
    if len(kept) != k_expected:
        return None
    return kept
