"""Corpus BLEU, duration statistics, and expressivity rating aggregation."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .filtering import TokenSequence

ASPECTS = ("emotion", "emphasis", "intonation", "rhythm")


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    hypotheses: Sequence[TokenSequence],
    references: Sequence[TokenSequence],
    max_n: int = 4,
    smooth_eps: float = 0.0,
) -> float:
    """Corpus-level BLEU in [0, 100].

    Modified n-gram precisions are clipped per sentence and pooled over the
    corpus; the score is their geometric mean times the brevity penalty
    ``exp(1 - r/c)`` when the hypothesis corpus is shorter than the
    references. Any zero precision yields 0 unless ``smooth_eps`` adds
    epsilon smoothing.
    """
    if len(hypotheses) != len(references):
        raise ValueError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if any(len(ref) == 0 for ref in references):
        raise ValueError("references must be non-empty")
    if smooth_eps < 0:
        raise ValueError("smooth_eps must be >= 0")

    matched = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            total[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(
                min(count, ref_counts[gram]) for gram, count in hyp_counts.items()
            )

    if hyp_len == 0:
        return 0.0
    # Orders with no hypothesis n-grams at all are undefined, not zero; they
    # drop out of the geometric mean so short-sentence corpora still score.
    logs = []
    for m, t in zip(matched, total):
        if t == 0:
            continue
        numerator = m + smooth_eps
        if numerator <= 0:
            return 0.0
        logs.append(math.log(numerator / (t + smooth_eps)))
    if not logs:
        return 0.0
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(sum(logs) / len(logs))


@dataclass(frozen=True)
class CorpusStats:
    """Duration statistics with a fixed-width histogram."""

    count: int
    min_s: float
    max_s: float
    mean_s: float
    histogram: tuple[tuple[float, float, int], ...]

    def __post_init__(self) -> None:
        if sum(count for _, _, count in self.histogram) != self.count:
            raise ValueError("histogram counts must sum to count")
        if not self.min_s <= self.mean_s <= self.max_s:
            raise ValueError("need min <= mean <= max")


def corpus_stats(durations_s: Sequence[float], bucket_width_s: float = 1.0) -> CorpusStats:
    """Exact count/min/max/mean plus a histogram over [0, ceil(max))."""
    if len(durations_s) == 0:
        raise ValueError("corpus_stats needs at least one duration")
    if bucket_width_s <= 0:
        raise ValueError("bucket_width_s must be positive")
    if any(d < 0 for d in durations_s):
        raise ValueError("durations must be >= 0")
    count = len(durations_s)
    min_s = min(durations_s)
    max_s = max(durations_s)
    mean_s = sum(durations_s) / count

    upper = max(math.ceil(max_s), bucket_width_s)
    n_buckets = max(1, math.ceil(upper / bucket_width_s))
    counts = [0] * n_buckets
    for d in durations_s:
        idx = min(int(d // bucket_width_s), n_buckets - 1)
        counts[idx] += 1
    histogram = tuple(
        (i * bucket_width_s, bucket_width_s, c) for i, c in enumerate(counts)
    )
    return CorpusStats(count, min_s, max_s, mean_s, histogram)


def render_stats_table(stats: CorpusStats) -> str:
    """Aligned-text rendering of a :class:`CorpusStats` report."""
    lines = [
        f"{'utterances':<12}{stats.count:>10d}",
        f"{'min (s)':<12}{stats.min_s:>10.3f}",
        f"{'max (s)':<12}{stats.max_s:>10.3f}",
        f"{'mean (s)':<12}{stats.mean_s:>10.3f}",
        "",
        f"{'bucket (s)':<16}{'count':>8}",
    ]
    for start, width, count in stats.histogram:
        lines.append(f"[{start:6.1f},{start + width:6.1f}){'':<3}{count:>8d}")
    return "\n".join(lines)


@dataclass(frozen=True)
class RatingSheet:
    """One rater's scores for one item across the four expressivity aspects."""

    item_id: str
    rater_id: str
    scores: Mapping[str, int]

    def __post_init__(self) -> None:
        if set(self.scores) != set(ASPECTS):
            raise ValueError(
                f"sheet ({self.item_id}, {self.rater_id}) must score exactly {ASPECTS}"
            )
        for aspect, score in self.scores.items():
            if not isinstance(score, int) or not 1 <= score <= 5:
                raise ValueError(
                    f"sheet ({self.item_id}, {self.rater_id}): {aspect} score {score!r} "
                    "out of range 1..5"
                )
        object.__setattr__(self, "scores", dict(self.scores))


@dataclass(frozen=True)
class RatingSummary:
    overall: Mapping[str, float]
    per_item: Mapping[str, Mapping[str, float]]


def aggregate_ratings(sheets: Iterable[RatingSheet]) -> RatingSummary:
    """Per-aspect arithmetic means over all sheets, plus per-item means."""
    seen: set[tuple[str, str]] = set()
    sheet_list = list(sheets)
    if not sheet_list:
        raise ValueError("aggregate_ratings needs at least one sheet")
    for sheet in sheet_list:
        key = (sheet.item_id, sheet.rater_id)
        if key in seen:
            raise ValueError(f"duplicate rating sheet for {key}")
        seen.add(key)

    overall = {
        aspect: sum(s.scores[aspect] for s in sheet_list) / len(sheet_list)
        for aspect in ASPECTS
    }
    per_item: dict[str, dict[str, float]] = {}
    for item_id in sorted({s.item_id for s in sheet_list}):
        item_sheets = [s for s in sheet_list if s.item_id == item_id]
        per_item[item_id] = {
            aspect: sum(s.scores[aspect] for s in item_sheets) / len(item_sheets)
            for aspect in ASPECTS
        }
    return RatingSummary(overall, per_item)


def load_rating_sheets(path: str | Path) -> list[RatingSheet]:
    """Read rating sheets from a delimited text file.

    Expected columns: item_id, rater_id, emotion, emphasis, intonation,
    rhythm. A header row with those names is skipped if present.
    """
    sheets: list[RatingSheet] = []
    with Path(path).open(newline="", encoding="utf-8") as handle:
        for row_no, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not field.strip() for field in row):
                continue
            fields = [field.strip() for field in row]
            if len(fields) != 6:
                raise ValueError(f"{path}:{row_no}: expected 6 columns, got {len(fields)}")
            if row_no == 1 and fields[0].lower() == "item_id":
                continue
            try:
                scores = {
                    aspect: int(fields[2 + i]) for i, aspect in enumerate(ASPECTS)
                }
            except ValueError as exc:
                raise ValueError(f"{path}:{row_no}: non-integer score") from exc
            sheets.append(RatingSheet(fields[0], fields[1], scores))
    duplicates = Counter((s.item_id, s.rater_id) for s in sheets)
    for key, count in duplicates.items():
        if count > 1:
            raise ValueError(f"{path}: duplicate rating sheet for {key}")
    return sheets
