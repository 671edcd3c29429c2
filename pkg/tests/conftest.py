import numpy as np
import pytest

from dubpair.audio import AudioBuffer


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_sine(freq_hz: float, duration_s: float = 1.0, sr: int = 16000, amplitude: float = 0.5) -> AudioBuffer:
    t = np.arange(int(duration_s * sr)) / sr
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq_hz * t), sr)
