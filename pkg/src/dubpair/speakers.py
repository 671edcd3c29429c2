"""Speaker pseudo-labeling and cross-lingual utterance pairing.

Utterance embeddings arrive from an adapter (mock or sidecar); this module
clusters them into per-track speaker pseudo-labels, matches English and
Spanish segments on the shared dubbing timeline, and applies the pair-level
similarity and per-speaker minimum-count filters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity is undefined for zero-norm vectors")
    return float(np.clip(float(a @ b) / (norm_a * norm_b), -1.0, 1.0))


@dataclass(frozen=True)
class SpeakerLabel:
    """A pseudo speaker id, scoped to one (title, language) track."""

    cluster_id: int
    title_id: str
    language: str

    def __post_init__(self) -> None:
        if self.cluster_id < 0:
            raise ValueError("cluster_id must be >= 0")


def pseudo_label(embeddings: Sequence[np.ndarray], tau: float = 0.75) -> list[int]:
    """Greedy online clustering of embeddings in input order.

    Each embedding joins the existing cluster whose running mean has the
    highest cosine similarity, provided that similarity reaches ``tau``;
    otherwise it opens a new cluster. Cluster ids are dense in order of first
    appearance.
    """
    if len(embeddings) == 0:
        raise ValueError("pseudo_label needs at least one embedding")
    sums: list[np.ndarray] = []
    counts: list[int] = []
    labels: list[int] = []
    dim: int | None = None
    for embedding in embeddings:
        vec = np.asarray(embedding, dtype=np.float64)
        if vec.ndim != 1:
            raise ValueError("embeddings must be 1-D vectors")
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise ValueError(f"inconsistent embedding dims: {vec.shape[0]} vs {dim}")
        best_sim = -np.inf
        best_id = -1
        for cid, (total, count) in enumerate(zip(sums, counts)):
            mean = total / count
            if float(np.linalg.norm(mean)) == 0.0:
                continue
            sim = cosine_similarity(vec, mean)
            if sim > best_sim:
                best_sim = sim
                best_id = cid
        if best_id >= 0 and best_sim >= tau:
            labels.append(best_id)
            sums[best_id] = sums[best_id] + vec
            counts[best_id] += 1
        else:
            labels.append(len(sums))
            sums.append(vec.copy())
            counts.append(1)
    return labels


@dataclass(frozen=True)
class PairedUtterance:
    """A matched English/Spanish utterance pair on one title's timeline."""

    en_utterance_id: str
    es_utterance_id: str
    overlap_iou: float
    cross_similarity: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.overlap_iou <= 1.0:
            raise ValueError(f"overlap_iou must be in [0, 1], got {self.overlap_iou}")
        if self.cross_similarity is not None and not -1.0 <= self.cross_similarity <= 1.0:
            raise ValueError("cross_similarity must be in [-1, 1]")


def interval_iou(a_start: int, a_end: int, b_start: int, b_end: int) -> float:
    """Intersection-over-union of two [start, end) intervals."""
    inter = max(0, min(a_end, b_end) - max(a_start, b_start))
    union = (a_end - a_start) + (b_end - b_start) - inter
    return inter / union if union > 0 else 0.0


def pair_segments(en, es, iou_min: float = 0.5) -> list[PairedUtterance]:
    """Greedily match English and Spanish segments by interval IoU.

    Candidates are taken in descending IoU order (deterministic tie-break on
    utterance ids); each segment joins at most one pair and pairs below
    ``iou_min`` are discarded.
    """
    titles = {s.title_id for s in en} | {s.title_id for s in es}
    if len(titles) > 1:
        raise ValueError(f"pair_segments got segments from multiple titles: {sorted(titles)}")

    candidates = []
    for e in en:
        for s in es:
            iou = interval_iou(e.start_ms, e.end_ms, s.start_ms, s.end_ms)
            if iou >= iou_min:
                candidates.append((iou, e.utterance_id, s.utterance_id))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

    used_en: set[str] = set()
    used_es: set[str] = set()
    pairs: list[PairedUtterance] = []
    for iou, en_id, es_id in candidates:
        if en_id in used_en or es_id in used_es:
            continue
        used_en.add(en_id)
        used_es.add(es_id)
        pairs.append(PairedUtterance(en_id, es_id, iou))
    return pairs


def filter_pairs_by_similarity(
    pairs: Iterable[PairedUtterance],
    embeddings: Mapping[str, np.ndarray],
    sim_max: float = 0.5,
    keep_below: bool = True,
) -> tuple[list[PairedUtterance], list[PairedUtterance]]:
    """Keep pairs whose cross-lingual embedding similarity is below ``sim_max``.

    The similarity is recorded on every returned pair, dropped ones included,
    so the decision is auditable. ``keep_below=False`` inverts the comparison
    for experiments that prefer same-voice pairs.
    """
    kept: list[PairedUtterance] = []
    dropped: list[PairedUtterance] = []
    for pair in pairs:
        for utt in (pair.en_utterance_id, pair.es_utterance_id):
            if utt not in embeddings:
                raise ValueError(f"missing embedding for utterance {utt}")
        sim = cosine_similarity(
            embeddings[pair.en_utterance_id], embeddings[pair.es_utterance_id]
        )
        annotated = replace(pair, cross_similarity=sim)
        below = sim < sim_max
        if below == keep_below:
            kept.append(annotated)
        else:
            dropped.append(annotated)
    return kept, dropped


def filter_speakers_min_count(
    pairs: Iterable[PairedUtterance],
    labels: Mapping[str, int],
    min_count: int = 5,
) -> tuple[list[PairedUtterance], list[PairedUtterance]]:
    """Keep pairs whose English-side speaker cluster retains enough pairs.

    Applied iteratively until a fixed point; with one cluster per pair a
    single pass already converges, but the loop guards against future
    multi-membership extensions.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    remaining = list(pairs)
    for pair in remaining:
        if pair.en_utterance_id not in labels:
            raise ValueError(f"missing speaker label for {pair.en_utterance_id}")
    dropped: list[PairedUtterance] = []
    while True:
        counts: dict[int, int] = {}
        for pair in remaining:
            cluster = labels[pair.en_utterance_id]
            counts[cluster] = counts.get(cluster, 0) + 1
        doomed = [p for p in remaining if counts[labels[p.en_utterance_id]] < min_count]
        if not doomed:
            return remaining, dropped
        doomed_ids = {p.en_utterance_id for p in doomed}
        remaining = [p for p in remaining if p.en_utterance_id not in doomed_ids]
        dropped.extend(doomed)
