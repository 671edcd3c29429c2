"""YIN pitch and voiced/unvoiced estimation.

Produces the per-frame F0 and voicing streams consumed by prosody-aware
synthesis models. The estimator is the classic YIN recipe: difference
function, cumulative-mean-normalized difference, absolute threshold on the
first dip, parabolic refinement of the chosen lag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import CANONICAL_RATE_HZ, AudioBuffer
from .features import frame_count


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame fundamental frequency with a voicing decision."""

    f0_hz: np.ndarray
    voiced: np.ndarray
    hop_ms: int

    def __post_init__(self) -> None:
        f0 = np.ascontiguousarray(np.asarray(self.f0_hz, dtype=np.float64))
        voiced = np.ascontiguousarray(np.asarray(self.voiced, dtype=bool))
        if f0.shape != voiced.shape or f0.ndim != 1:
            raise ValueError("f0_hz and voiced must be 1-D arrays of equal length")
        if np.any(f0[~voiced] != 0.0):
            raise ValueError("unvoiced frames must carry f0 = 0")
        f0.setflags(write=False)
        voiced.setflags(write=False)
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "voiced", voiced)

    @property
    def n_frames(self) -> int:
        return int(self.f0_hz.shape[0])

    @property
    def voiced_fraction(self) -> float:
        return float(self.voiced.mean()) if self.n_frames else 0.0


def _difference_function(frames: np.ndarray, tau_max: int) -> np.ndarray:
    n_frames, window = frames.shape
    d = np.zeros((n_frames, tau_max + 1))
    for tau in range(1, tau_max + 1):
        diff = frames[:, : window - tau] - frames[:, tau:]
        d[:, tau] = np.einsum("ij,ij->i", diff, diff)
    return d


def _cmndf(d: np.ndarray) -> np.ndarray:
    taus = np.arange(1, d.shape[1])
    cumulative = np.cumsum(d[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = d[:, 1:] * taus / cumulative
    normalized = np.where(cumulative > 0.0, normalized, 1.0)
    return np.concatenate([np.ones((d.shape[0], 1)), normalized], axis=1)


def _parabolic_min(values: np.ndarray, i: int) -> float:
    if i <= 0 or i >= values.shape[0] - 1:
        return float(i)
    left, mid, right = values[i - 1], values[i], values[i + 1]
    denom = left - 2.0 * mid + right
    if denom == 0.0:
        return float(i)
    shift = 0.5 * (left - right) / denom
    return float(i) + float(np.clip(shift, -1.0, 1.0))


def estimate_pitch_yin(
    buffer: AudioBuffer,
    *,
    f0_min: float = 60.0,
    f0_max: float = 500.0,
    threshold: float = 0.15,
    window_ms: int = 40,
    hop_ms: int = 20,
) -> PitchTrack:
    """Estimate per-frame F0 and voicing with YIN.

    A frame is voiced when its cumulative-mean-normalized difference dips
    below ``threshold`` somewhere in the lag range corresponding to
    [f0_min, f0_max]; the dip's local minimum is refined by parabolic
    interpolation. Frames with no qualifying dip are unvoiced with f0 = 0.
    """
    sr = buffer.sample_rate_hz
    if sr != CANONICAL_RATE_HZ:
        raise ValueError(f"pitch estimation expects {CANONICAL_RATE_HZ} Hz, got {sr}")
    if not 0.0 < f0_min < f0_max:
        raise ValueError("need 0 < f0_min < f0_max")

    window = sr * window_ms // 1000
    hop = sr * hop_ms // 1000
    tau_min = max(2, math.ceil(sr / f0_max))
    tau_max = min(int(sr / f0_min), window - 1)

    n_frames = frame_count(buffer.n_samples, window, hop)
    if n_frames == 0:
        return PitchTrack(np.zeros(0), np.zeros(0, dtype=bool), hop_ms)

    idx = hop * np.arange(n_frames)[:, None] + np.arange(window)[None, :]
    frames = buffer.samples[idx]
    cmndf = _cmndf(_difference_function(frames, tau_max))

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for i in range(n_frames):
        row = cmndf[i]
        tau = tau_min
        found = -1
        while tau <= tau_max:
            if row[tau] < threshold:
                while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
                    tau += 1
                found = tau
                break
            tau += 1
        if found < 0:
            continue
        refined = _parabolic_min(row, found)
        freq = sr / refined
        f0[i] = float(np.clip(freq, f0_min, f0_max))
        voiced[i] = True
    return PitchTrack(f0, voiced, hop_ms)
