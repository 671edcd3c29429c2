"""Discrete-unit representation of frame features.

A K-means codebook trained on frame features turns each utterance into a
sequence of cluster indices at the frame rate; continuous repetitions are
condensed into (unit, run_length) pairs and can be expanded back exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

UnitSequence = list[int]


@dataclass(frozen=True)
class Centroids:
    """A trained unit codebook with its training provenance."""

    k: int
    dim: int
    vectors: np.ndarray  # (k, dim)
    seed: int
    inertia: float
    inertia_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        vectors = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if vectors.shape != (self.k, self.dim):
            raise ValueError(
                f"vectors shape {vectors.shape} does not match (k={self.k}, dim={self.dim})"
            )
        if self.inertia < 0:
            raise ValueError("inertia must be >= 0")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)


@dataclass(frozen=True)
class CondensedUnits:
    """Run-length encoded unit sequence; expansion is exact."""

    runs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for unit, length in self.runs:
            if length < 1:
                raise ValueError(f"run length must be >= 1, got {length} for unit {unit}")
        for (a, _), (b, _) in zip(self.runs, self.runs[1:]):
            if a == b:
                raise ValueError(f"adjacent runs share unit id {a}")

    @property
    def ids(self) -> list[int]:
        """The reduced-id view: one entry per run, lengths discarded."""
        return [unit for unit, _ in self.runs]

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.runs)


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        + np.einsum("ij,ij->i", centers, centers)[None, :]
        - 2.0 * (x @ centers.T)
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centers[0] = x[first]
    closest = _squared_distances(x, centers[:1])[:, 0]
    for i in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[i] = x[idx]
        closest = np.minimum(closest, _squared_distances(x, centers[i : i + 1])[:, 0])
    return centers


def _update_centers(
    x: np.ndarray, assign: np.ndarray, min_d2: np.ndarray, centers: np.ndarray
) -> np.ndarray:
    k = centers.shape[0]
    new_centers = np.empty_like(centers)
    counts = np.bincount(assign, minlength=k)
    for cid in range(k):
        if counts[cid] > 0:
            new_centers[cid] = x[assign == cid].mean(axis=0)
    # Empty clusters steal the point currently farthest from its centroid.
    stealable = min_d2.copy()
    for cid in np.flatnonzero(counts == 0):
        far = int(np.argmax(stealable))
        new_centers[cid] = x[far]
        stealable[far] = -1.0
    return new_centers


def kmeans_fit(
    frames: np.ndarray,
    k: int,
    max_iters: int = 100,
    tol: float = 1e-6,
    seed: int = 0,
) -> Centroids:
    """Fit a K-means codebook with k-means++ initialization and Lloyd updates.

    Deterministic for a given (frames, k, seed). Iteration stops when the
    relative inertia change falls below ``tol`` or after ``max_iters``
    rounds; empty clusters are repaired by stealing the point farthest from
    its assigned centroid. Inertia is checked to be non-increasing on every
    iteration.
    """
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"frames must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("frames contain non-finite values")
    n, dim = x.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} frames, got {n}")

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(x, k, rng)

    history: list[float] = []
    prev_inertia: float | None = None
    for _ in range(max_iters):
        d2 = _squared_distances(x, centers)
        assign = np.argmin(d2, axis=1)
        min_d2 = d2[np.arange(n), assign]
        inertia = float(min_d2.sum())
        assert not history or inertia <= history[-1] * (1.0 + 1e-12) + 1e-12, (
            "k-means inertia increased"
        )
        history.append(inertia)
        if prev_inertia is not None and abs(prev_inertia - inertia) <= tol * max(
            prev_inertia, 1e-300
        ):
            break
        prev_inertia = inertia
        centers = _update_centers(x, assign, min_d2, centers)
    else:
        d2 = _squared_distances(x, centers)
        assign = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), assign].sum())
        assert inertia <= history[-1] * (1.0 + 1e-12) + 1e-12, "k-means inertia increased"
        history.append(inertia)

    if np.unique(centers, axis=0).shape[0] < k:
        raise RuntimeError(
            "k-means produced duplicate centroids; the data has fewer than k distinct points"
        )
    return Centroids(k, dim, centers, seed, history[-1], tuple(history))


def assign_units(frames: np.ndarray, centroids: Centroids) -> UnitSequence:
    """Map each frame to its nearest centroid (lowest id wins ties)."""
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"frames must be 2-D, got shape {x.shape}")
    if x.shape[0] == 0:
        return []
    if x.shape[1] != centroids.dim:
        raise ValueError(
            f"frame dim {x.shape[1]} does not match centroid dim {centroids.dim}"
        )
    d2 = _squared_distances(x, centroids.vectors)
    return [int(u) for u in np.argmin(d2, axis=1)]


def condense(units: Sequence[int]) -> CondensedUnits:
    """Collapse maximal runs of repeated unit ids into (id, length) pairs."""
    runs = tuple((int(unit), len(list(group))) for unit, group in groupby(units))
    return CondensedUnits(runs)


def expand(condensed: CondensedUnits | Iterable[tuple[int, int]]) -> UnitSequence:
    """Exact inverse of :func:`condense`."""
    runs = condensed.runs if isinstance(condensed, CondensedUnits) else tuple(condensed)
    out: UnitSequence = []
    for unit, length in runs:
        if length < 1:
            raise ValueError(f"run length must be >= 1, got {length}")
        out.extend([int(unit)] * int(length))
    return out


def format_units(condensed: CondensedUnits) -> str:
    """Serialize runs as space-separated ``id*count`` tokens."""
    return " ".join(f"{unit}*{length}" for unit, length in condensed.runs)


def parse_units(text: str) -> CondensedUnits:
    """Parse ``id*count`` tokens (a bare ``id`` means count 1)."""
    runs: list[tuple[int, int]] = []
    for token in text.split():
        if "*" in token:
            unit_str, count_str = token.split("*", 1)
            runs.append((int(unit_str), int(count_str)))
        else:
            runs.append((int(token), 1))
    return CondensedUnits(tuple(runs))


def save_centroids(path: str | Path, centroids: Centroids) -> None:
    """Write centroids as text: a ``k dim seed inertia`` header then k rows."""
    lines = [f"{centroids.k} {centroids.dim} {centroids.seed} {centroids.inertia!r}"]
    for row in centroids.vectors:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_centroids(path: str | Path) -> Centroids:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty centroid file")
    head = text[0].split()
    if len(head) != 4:
        raise ValueError(f"{path}: malformed header {text[0]!r}")
    k, dim, seed = int(head[0]), int(head[1]), int(head[2])
    inertia = float(head[3])
    vectors = np.array([[float(v) for v in line.split()] for line in text[1:]])
    return Centroids(k, dim, vectors, seed, inertia)
