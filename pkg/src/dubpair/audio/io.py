"""RIFF/WAVE reading and writing.

Reads PCM16 and IEEE-float WAV files (mono or stereo, stereo downmixed by
channel averaging); writes PCM16 mono. The parser is deliberately strict so a
truncated or unsupported file fails with a message naming the problem instead
of yielding garbage samples.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import AudioBuffer

_FORMAT_PCM = 1
_FORMAT_FLOAT = 3
_FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    """Raised for unsupported or corrupt WAV files."""


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        yield chunk_id, size, body
        pos += 8 + size + (size & 1)


def _parse_fmt(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise WavFormatError("truncated fmt chunk")
    tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", body, 0
    )
    if tag == _FORMAT_EXTENSIBLE:
        # Effective format lives in the first two bytes of the SubFormat GUID.
        if len(body) < 26:
            raise WavFormatError("truncated WAVE_FORMAT_EXTENSIBLE fmt chunk")
        (cb_size,) = struct.unpack_from("<H", body, 16)
        if cb_size < 22 or len(body) < 18 + 22:
            raise WavFormatError("truncated WAVE_FORMAT_EXTENSIBLE extension")
        (tag,) = struct.unpack_from("<H", body, 18 + 6)
    return tag, channels, rate, bits


def _decode_samples(tag: int, bits: int, body: bytes) -> np.ndarray:
    if tag == _FORMAT_PCM:
        if bits != 16:
            raise WavFormatError(f"unsupported PCM bit depth {bits} (format tag 1)")
        ints = np.frombuffer(body, dtype="<i2")
        return ints.astype(np.float64) / 32768.0
    if tag == _FORMAT_FLOAT:
        if bits == 32:
            return np.frombuffer(body, dtype="<f4").astype(np.float64)
        if bits == 64:
            return np.frombuffer(body, dtype="<f8").astype(np.float64)
        raise WavFormatError(f"unsupported float bit depth {bits} (format tag 3)")
    raise WavFormatError(f"unsupported codec (format tag {tag})")


def _read_riff(path: str | Path) -> tuple[int, int, int, int, bytes]:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt: tuple[int, int, int, int] | None = None
    payload: bytes | None = None
    for chunk_id, size, body in _iter_chunks(data):
        if len(body) < size:
            raise WavFormatError(
                f"{path}: truncated {chunk_id.decode('ascii', 'replace')} chunk "
                f"(declared {size} bytes, found {len(body)})"
            )
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            payload = body
    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise WavFormatError(f"{path}: missing data chunk")
    tag, channels, rate, bits = fmt
    if channels not in (1, 2):
        raise WavFormatError(f"{path}: unsupported channel count {channels}")
    if rate <= 0:
        raise WavFormatError(f"{path}: invalid sample rate {rate}")
    return tag, channels, rate, bits, payload


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a WAV file into a mono :class:`AudioBuffer` at its native rate."""
    tag, channels, rate, bits, payload = _read_riff(path)
    bytes_per_sample = bits // 8
    frame_size = bytes_per_sample * channels
    if frame_size and len(payload) % frame_size:
        raise WavFormatError(f"{path}: data chunk is not a whole number of frames")
    samples = _decode_samples(tag, bits, payload)
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples, rate)


def wav_info(path: str | Path) -> tuple[int, int]:
    """Return (n_samples, sample_rate_hz) without decoding the payload."""
    tag, channels, rate, bits, payload = _read_riff(path)
    del tag
    frame_size = (bits // 8) * channels
    n = len(payload) // frame_size if frame_size else 0
    return n, rate


def write_wav(path: str | Path, buffer: AudioBuffer) -> None:
    """Write ``buffer`` as PCM16 mono."""
    samples = np.clip(buffer.samples, -1.0, 1.0)
    ints = np.clip(np.rint(samples * 32768.0), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    rate = buffer.sample_rate_hz
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(payload)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, _FORMAT_PCM, 1, rate, rate * 2, 2, 16),
            b"data",
            struct.pack("<I", len(payload)),
        ]
    )
    Path(path).write_bytes(header + payload)
