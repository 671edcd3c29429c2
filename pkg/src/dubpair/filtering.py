"""Text normalization, word error rate, and the corpus quality filters.

Segments survive when their ASR transcript tracks the subtitle text closely
enough (WER threshold plus a best-fraction cut) and when their duration falls
inside the usable range.
"""

from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass, field

TokenSequence = list[str]

# Word characters minus underscore, with apostrophes kept only inside words.
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


def normalize_text(text: str, language: str = "en") -> TokenSequence:
    """Lowercase, strip punctuation, and tokenize on whitespace.

    Applies Unicode compatibility normalization first and keeps intra-word
    apostrophes; the same rules serve both languages (Spanish diacritics pass
    through untouched), so ``language`` is accepted for interface symmetry.
    """
    del language
    text = unicodedata.normalize("NFKC", text)
    text = text.replace("’", "'")
    return _TOKEN_RE.findall(text.lower())


def wer(reference: TokenSequence, hypothesis: TokenSequence) -> float:
    """Token-level Levenshtein distance divided by reference length."""
    if not reference:
        raise ValueError("wer is undefined for an empty reference")
    prev = list(range(len(hypothesis) + 1))
    for i, ref_tok in enumerate(reference, start=1):
        cur = [i] + [0] * len(hypothesis)
        for j, hyp_tok in enumerate(hypothesis, start=1):
            cost = 0 if ref_tok == hyp_tok else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1] / len(reference)


@dataclass(frozen=True)
class SegmentRecord:
    """One sliced utterance with its transcript bookkeeping."""

    utterance_id: str
    title_id: str
    language: str
    start_ms: int
    end_ms: int
    subtitle_text: str
    asr_text: str | None = None
    wer: float | None = None
    duration_s: float = field(default=-1.0)

    def __post_init__(self) -> None:
        if self.end_ms <= self.start_ms:
            raise ValueError(
                f"{self.utterance_id}: end_ms must be after start_ms"
            )
        expected = (self.end_ms - self.start_ms) / 1000.0
        if self.duration_s < 0:
            object.__setattr__(self, "duration_s", expected)
        elif abs(self.duration_s - expected) > 1e-6:
            raise ValueError(
                f"{self.utterance_id}: duration_s {self.duration_s} does not match "
                f"interval length {expected}"
            )
        if self.wer is not None and self.asr_text is None:
            raise ValueError(f"{self.utterance_id}: wer present without asr_text")
        if self.wer is not None and self.wer < 0:
            raise ValueError(f"{self.utterance_id}: wer must be >= 0")


def filter_by_wer(
    segments: list[SegmentRecord],
    wer_max: float = 0.6,
    keep_fraction: float = 0.8,
) -> tuple[list[SegmentRecord], list[SegmentRecord]]:
    """Drop segments with WER above ``wer_max``, then keep the best fraction.

    Survivors are ordered ascending by WER (ties broken by utterance id); the
    kept list is the first ``floor(keep_fraction * len(survivors))`` of that
    ordering.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    for segment in segments:
        if segment.wer is None:
            raise ValueError(f"{segment.utterance_id}: missing wer")

    over = [s for s in segments if s.wer > wer_max]
    survivors = sorted(
        (s for s in segments if s.wer <= wer_max),
        key=lambda s: (s.wer, s.utterance_id),
    )
    keep_n = math.floor(keep_fraction * len(survivors))
    kept = survivors[:keep_n]
    dropped = sorted(
        survivors[keep_n:] + over, key=lambda s: (s.wer, s.utterance_id)
    )
    return kept, dropped


def filter_by_duration(
    segments: list[SegmentRecord],
    min_s: float = 3.0,
    max_s: float = 15.0,
) -> tuple[list[SegmentRecord], list[SegmentRecord]]:
    """Partition segments into those inside [min_s, max_s] (inclusive) and the rest."""
    if not 0.0 < min_s < max_s:
        raise ValueError(f"need 0 < min_s < max_s, got {min_s}, {max_s}")
    kept = [s for s in segments if min_s <= s.duration_s <= max_s]
    dropped = [s for s in segments if not min_s <= s.duration_s <= max_s]
    return kept, dropped
