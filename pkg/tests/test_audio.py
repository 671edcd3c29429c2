import struct

import numpy as np
import pytest

from dubpair.audio import (
    AudioBuffer,
    mfcc,
    read_wav,
    resample,
    slice_ms,
    wav_info,
    write_wav,
)
from dubpair.audio.features import frame_count
from dubpair.audio.io import WavFormatError

from conftest import make_sine


def dominant_frequency(buf: AudioBuffer) -> float:
    spectrum = np.abs(np.fft.rfft(buf.samples))
    return float(np.argmax(spectrum) * buf.sample_rate_hz / buf.n_samples)


class TestWavIO:
    def test_round_trip_within_quantization(self, tmp_path):
        buf = make_sine(440.0)
        path = tmp_path / "sine.wav"
        write_wav(path, buf)
        back = read_wav(path)
        assert back.sample_rate_hz == 16000
        assert back.n_samples == buf.n_samples
        assert np.max(np.abs(back.samples - buf.samples)) <= 1 / 32768

    def test_stereo_opposite_channels_average_to_silence(self, tmp_path):
        rng = np.random.default_rng(7)
        mono = np.clip(rng.standard_normal(1000) * 0.3, -1, 1)
        ints = np.clip(np.rint(mono * 32768.0), -32768, 32767).astype("<i2")
        interleaved = np.empty(2000, dtype="<i2")
        interleaved[0::2] = ints
        interleaved[1::2] = -ints
        payload = interleaved.tobytes()
        path = tmp_path / "stereo.wav"
        header = b"".join(
            [
                b"RIFF",
                struct.pack("<I", 36 + len(payload)),
                b"WAVE",
                b"fmt ",
                struct.pack("<IHHIIHH", 16, 1, 2, 16000, 64000, 4, 16),
                b"data",
                struct.pack("<I", len(payload)),
            ]
        )
        path.write_bytes(header + payload)
        back = read_wav(path)
        assert back.n_samples == 1000
        assert np.max(np.abs(back.samples)) == 0.0

    def test_zero_sample_file_reads_empty(self, tmp_path):
        path = tmp_path / "empty.wav"
        write_wav(path, AudioBuffer(np.empty(0), 16000))
        back = read_wav(path)
        assert back.n_samples == 0

    def test_float32_payload_supported(self, tmp_path):
        samples = np.linspace(-0.5, 0.5, 64, dtype=np.float32)
        payload = samples.tobytes()
        header = b"".join(
            [
                b"RIFF",
                struct.pack("<I", 36 + len(payload)),
                b"WAVE",
                b"fmt ",
                struct.pack("<IHHIIHH", 16, 3, 1, 16000, 64000, 4, 32),
                b"data",
                struct.pack("<I", len(payload)),
            ]
        )
        path = tmp_path / "float.wav"
        path.write_bytes(header + payload)
        back = read_wav(path)
        assert np.allclose(back.samples, samples.astype(np.float64))

    def test_unsupported_codec_names_format_tag(self, tmp_path):
        header = b"".join(
            [
                b"RIFF",
                struct.pack("<I", 36),
                b"WAVE",
                b"fmt ",
                struct.pack("<IHHIIHH", 16, 7, 1, 16000, 16000, 1, 8),  # mu-law
                b"data",
                struct.pack("<I", 0),
            ]
        )
        path = tmp_path / "mulaw.wav"
        path.write_bytes(header)
        with pytest.raises(WavFormatError, match="format tag 7"):
            read_wav(path)

    def test_truncated_data_chunk_errors(self, tmp_path):
        buf = make_sine(440.0, duration_s=0.01)
        path = tmp_path / "trunc.wav"
        write_wav(path, buf)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 10])
        with pytest.raises(WavFormatError, match="truncated"):
            read_wav(path)

    def test_wav_info_matches_read(self, tmp_path):
        buf = make_sine(100.0, duration_s=0.25)
        path = tmp_path / "info.wav"
        write_wav(path, buf)
        n, rate = wav_info(path)
        assert (n, rate) == (buf.n_samples, 16000)


class TestResample:
    def test_same_rate_identity(self):
        buf = make_sine(440.0)
        assert resample(buf, 16000) is buf

    def test_dc_preserved(self):
        buf = AudioBuffer(np.full(48000, 0.25), 48000)
        out = resample(buf, 16000)
        assert np.max(np.abs(out.samples - 0.25)) <= 1e-3

    def test_output_length_within_one(self):
        for n in (1, 7, 1000, 16001):
            buf = AudioBuffer(np.zeros(n), 48000)
            out = resample(buf, 16000)
            assert abs(out.n_samples - round(n * 16000 / 48000)) <= 1

    def test_sine_peak_preserved_48k_to_16k(self):
        buf = make_sine(440.0, duration_s=1.0, sr=48000)
        out = resample(buf, 16000)
        assert abs(dominant_frequency(out) - 440.0) <= 1.0

    def test_round_trip_band_limited_peak(self):
        # A -> B -> A keeps the dominant peak within 1 Hz for tones below
        # 0.4x the lower rate.
        for freq in (440.0, 1000.0, 3000.0):
            buf = make_sine(freq, duration_s=1.0, sr=16000)
            out = resample(resample(buf, 48000), 16000)
            assert abs(dominant_frequency(out) - freq) <= 1.0

    def test_non_positive_target_rejected(self):
        with pytest.raises(ValueError):
            resample(make_sine(440.0), 0)

    def test_out_of_range_rate_rejected(self):
        with pytest.raises(ValueError):
            resample(make_sine(440.0), 96000)


class TestSlice:
    def test_full_range_identity(self):
        buf = make_sine(440.0)
        out = slice_ms(buf, 0, 1000)
        assert np.array_equal(out.samples, buf.samples)

    def test_one_second_is_16000_samples(self):
        buf = make_sine(440.0, duration_s=2.0)
        assert slice_ms(buf, 0, 1000).n_samples == 16000

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            slice_ms(make_sine(440.0), 500, 500)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            slice_ms(make_sine(440.0), 0, 1001)

    def test_composition(self):
        buf = make_sine(440.0, duration_s=2.0)
        inner = slice_ms(buf, 250, 1750)
        assert np.array_equal(
            slice_ms(inner, 0, 1500).samples, slice_ms(buf, 250, 1750).samples
        )


class TestMfcc:
    def test_one_second_frame_count(self):
        out = mfcc(make_sine(440.0))
        assert out.n_frames == 49
        assert out.frames.shape == (49, 13)

    def test_frame_count_formula_on_random_lengths(self, rng):
        for _ in range(100):
            n = int(rng.integers(0, 40000))
            buf = AudioBuffer(np.zeros(n), 16000)
            out = mfcc(buf)
            assert out.n_frames == frame_count(n, 400, 320)

    def test_silence_frames_identical(self):
        out = mfcc(AudioBuffer(np.zeros(16000), 16000))
        assert out.n_frames > 1
        assert np.all(out.frames == out.frames[0])

    def test_short_buffer_gives_empty_matrix(self):
        out = mfcc(AudioBuffer(np.zeros(100), 16000))
        assert out.n_frames == 0
        assert out.frames.shape == (0, 13)

    def test_tone_stationarity(self):
        # 1 kHz at 16 kHz has a 16-sample period dividing the 320-sample hop,
        # so interior frames see identical waveforms.
        out = mfcc(make_sine(1000.0))
        interior = out.frames[1:-1]
        variances = interior.var(axis=0)
        magnitudes = np.abs(interior).mean(axis=0)
        assert np.all(variances <= 0.01 * np.maximum(magnitudes, 1e-12))

    def test_wrong_rate_rejected(self):
        with pytest.raises(ValueError):
            mfcc(AudioBuffer(np.zeros(48000), 48000))
