"""MFCC frame features over 16 kHz audio.

These stand in for learned continuous speech representations at desk scale;
the downstream unit codec only sees a frames-by-coefficients matrix, so other
feature extractors can be swapped in without code changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from . import CANONICAL_RATE_HZ, AudioBuffer

LOG_FLOOR = 1e-10
_N_FFT = 512


@dataclass(frozen=True)
class FrameMatrix:
    """Per-frame feature vectors with their framing geometry."""

    frames: np.ndarray  # (n_frames, n_coeffs)
    hop_ms: int
    window_ms: int

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ValueError(f"frames must be 2-D, got shape {frames.shape}")
        frames = np.ascontiguousarray(frames)
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])


def frame_count(n_samples: int, window_samples: int, hop_samples: int) -> int:
    if n_samples < window_samples:
        return 0
    return (n_samples - window_samples) // hop_samples + 1


def _hz_to_mel(hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _mel_filterbank(n_mels: int, n_fft: int, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filters spanning 0..Nyquist, shape (n_mels, n_fft//2+1)."""
    f_max = sample_rate_hz / 2.0
    mel_points = np.linspace(0.0, _hz_to_mel(f_max), n_mels + 2)
    hz_points = np.asarray(_mel_to_hz(mel_points))
    bin_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate_hz)

    bank = np.zeros((n_mels, bin_freqs.shape[0]))
    for m in range(n_mels):
        left, center, right = hz_points[m : m + 3]
        rise = (bin_freqs - left) / max(center - left, 1e-12)
        fall = (right - bin_freqs) / max(right - center, 1e-12)
        bank[m] = np.clip(np.minimum(rise, fall), 0.0, None)
    bank.setflags(write=False)
    return bank


def mfcc(
    buffer: AudioBuffer,
    *,
    window_ms: int = 25,
    hop_ms: int = 20,
    n_mels: int = 26,
    n_coeffs: int = 13,
    pre_emphasis: float = 0.97,
) -> FrameMatrix:
    """Compute MFCC features per frame.

    Per frame: pre-emphasis, Hamming window, power spectrum, triangular mel
    filterbank over 0-8000 Hz, log with a fixed floor, DCT-II, keep the first
    ``n_coeffs`` coefficients. Buffers shorter than one window produce an
    empty matrix.
    """
    sr = buffer.sample_rate_hz
    if sr != CANONICAL_RATE_HZ:
        raise ValueError(f"mfcc expects {CANONICAL_RATE_HZ} Hz input, got {sr}")
    window = sr * window_ms // 1000
    hop = sr * hop_ms // 1000
    n_frames = frame_count(buffer.n_samples, window, hop)
    if n_frames == 0:
        return FrameMatrix(np.zeros((0, n_coeffs)), hop_ms, window_ms)

    idx = hop * np.arange(n_frames)[:, None] + np.arange(window)[None, :]
    frames = buffer.samples[idx]

    emphasized = np.empty_like(frames)
    emphasized[:, 0] = frames[:, 0]
    emphasized[:, 1:] = frames[:, 1:] - pre_emphasis * frames[:, :-1]

    windowed = emphasized * np.hamming(window)
    power = np.abs(np.fft.rfft(windowed, _N_FFT, axis=1)) ** 2
    energies = power @ _mel_filterbank(n_mels, _N_FFT, sr).T
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))
    coeffs = scipy.fft.dct(log_energies, type=2, norm="ortho", axis=1)[:, :n_coeffs]
    return FrameMatrix(coeffs, hop_ms, window_ms)
