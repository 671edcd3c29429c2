"""Audio primitives: buffers, WAV I/O, resampling, MFCC frames, YIN pitch.

All pipeline-internal processing happens on mono float buffers at a canonical
16 kHz rate; the helpers here are pure functions over immutable buffers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CANONICAL_RATE_HZ = 16000


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono audio: float samples in [-1, 1] at a fixed rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"expected mono 1-D samples, got shape {samples.shape}")
        samples = np.ascontiguousarray(samples)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n_samples(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


def slice_ms(buffer: AudioBuffer, start_ms: int, end_ms: int) -> AudioBuffer:
    """Return the sample-exact sub-range [start_ms, end_ms) of ``buffer``.

    Sample indices are ``floor(ms * rate / 1000)``; the range must be
    non-empty and lie inside the buffer.
    """
    if start_ms < 0:
        raise ValueError(f"start_ms must be >= 0, got {start_ms}")
    if end_ms <= start_ms:
        raise ValueError(f"empty or inverted range [{start_ms}, {end_ms})")
    sr = buffer.sample_rate_hz
    if end_ms * sr > buffer.n_samples * 1000:
        raise ValueError(
            f"end_ms {end_ms} beyond buffer duration {buffer.duration_s * 1000:.3f} ms"
        )
    lo = start_ms * sr // 1000
    hi = end_ms * sr // 1000
    return AudioBuffer(buffer.samples[lo:hi], sr)


from .io import read_wav, wav_info, write_wav  # noqa: E402
from .resample import resample  # noqa: E402
from .features import FrameMatrix, mfcc  # noqa: E402
from .pitch import PitchTrack, estimate_pitch_yin  # noqa: E402

__all__ = [
    "AudioBuffer",
    "CANONICAL_RATE_HZ",
    "FrameMatrix",
    "PitchTrack",
    "estimate_pitch_yin",
    "mfcc",
    "read_wav",
    "resample",
    "slice_ms",
    "wav_info",
    "write_wav",
]
