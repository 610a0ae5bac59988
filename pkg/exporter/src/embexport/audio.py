"""Audio loading: WAV in, mono float32 at the encoder's sample rate out."""

from __future__ import annotations

import math

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .errors import DataError

_INT_SCALE = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2147483648.0,
              np.dtype(np.uint8): 128.0}


def load_audio_mono(path, target_rate: int) -> np.ndarray:
    """Decode a WAV file to mono float32 resampled to ``target_rate``."""
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DataError(f"{path}: cannot read audio ({exc})") from None
    if data.size == 0:
        raise DataError(f"{path}: audio file contains no samples")
    if data.dtype in _INT_SCALE:
        signal = data.astype(np.float32) / _INT_SCALE[data.dtype]
        if data.dtype == np.dtype(np.uint8):
            signal -= 1.0
    else:
        signal = data.astype(np.float32)
    if signal.ndim == 2:
        signal = signal.mean(axis=1)
    elif signal.ndim != 1:
        raise DataError(f"{path}: unsupported channel layout {data.shape}")
    if rate != target_rate:
        divisor = math.gcd(int(rate), int(target_rate))
        signal = resample_poly(signal, target_rate // divisor,
                               rate // divisor).astype(np.float32)
        if signal.size == 0:
            raise DataError(
                f"{path}: too short to resample from {rate} to {target_rate} Hz")
    return np.ascontiguousarray(signal, dtype=np.float32)
