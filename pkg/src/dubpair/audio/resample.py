"""Band-limited sample-rate conversion via a windowed-sinc polyphase filter."""

from __future__ import annotations

import math

import numpy as np
from scipy import signal

from . import AudioBuffer

RATE_MIN_HZ = 8000
RATE_MAX_HZ = 48000

# Cutoff sits at 0.45x the lower of the two rates; the Kaiser beta targets
# ~80 dB stopband attenuation. Both are fixed so outputs are reproducible.
_CUTOFF_FRACTION = 0.45
_STOPBAND_DB = 80.0
_TAPS_PER_PHASE = 16


def resample(buffer: AudioBuffer, target_hz: int) -> AudioBuffer:
    """Resample ``buffer`` to ``target_hz``.

    Same-rate input is returned unchanged. Output length is
    ``ceil(n * target / source)`` which stays within one sample of the exact
    ratio. Edges are handled by replicating boundary samples so constant
    signals stay constant.
    """
    if target_hz <= 0:
        raise ValueError(f"target rate must be positive, got {target_hz}")
    source_hz = buffer.sample_rate_hz
    for rate in (source_hz, target_hz):
        if not RATE_MIN_HZ <= rate <= RATE_MAX_HZ:
            raise ValueError(
                f"rate {rate} outside supported range [{RATE_MIN_HZ}, {RATE_MAX_HZ}]"
            )
    if target_hz == source_hz:
        return buffer

    x = buffer.samples
    n = x.shape[0]
    if n == 0:
        return AudioBuffer(np.empty(0), target_hz)

    g = math.gcd(source_hz, target_hz)
    up = target_hz // g
    down = source_hz // g
    max_rate = max(up, down)

    half_len = _TAPS_PER_PHASE * max_rate
    numtaps = 2 * half_len + 1
    beta = signal.kaiser_beta(_STOPBAND_DB)
    cutoff_hz = _CUTOFF_FRACTION * min(source_hz, target_hz)
    h = signal.firwin(numtaps, cutoff_hz, window=("kaiser", beta), fs=source_hz * up)
    h = h * up

    # Replicate edges so the FIR transient does not see implicit zeros.
    pad = -(-half_len // up) + 1
    x_pad = np.concatenate([np.full(pad, x[0]), x, np.full(pad, x[-1])])

    delay = half_len + pad * up
    pre_zeros = (-delay) % down
    if pre_zeros:
        h = np.concatenate([np.zeros(pre_zeros), h])
    y = signal.upfirdn(h, x_pad, up, down)

    skip = (delay + pre_zeros) // down
    n_out = -(-n * up // down)
    y = y[skip : skip + n_out]
    return AudioBuffer(np.clip(y, -1.0, 1.0), target_hz)
