"""Audio clip container and WAV file I/O.

Clips are mono float buffers with amplitudes nominally in [-1, 1].
WAV input may be PCM 16-bit or 32-bit float; multichannel files are
downmixed by channel averaging at load time. No resampling is done.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

from .errors import InvalidInputError


@dataclass
class AudioClip:
    samples: np.ndarray  # mono, float
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("samples must be a non-empty 1-D buffer")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples contain non-finite values")
        if int(self.sample_rate) <= 0:
            raise InvalidInputError("sample_rate must be positive")
        self.samples = samples
        self.sample_rate = int(self.sample_rate)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "AudioClip":
        return AudioClip(samples=samples, sample_rate=self.sample_rate)


def load_wav(path) -> AudioClip:
    """Read a WAV file as a mono clip.

    PCM 16-bit data is scaled by 1/32768; float32 data is taken as-is.
    Channels are averaged into one.
    """
    sr, data = wavfile.read(path)
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise InvalidInputError(
            f"unsupported WAV sample format {data.dtype}; expected int16 or float32"
        )
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioClip(samples=samples, sample_rate=int(sr))


def save_wav(path, clip: AudioClip) -> None:
    """Write a clip as a 32-bit float WAV (lossless for float32 data)."""
    wavfile.write(path, clip.sample_rate, clip.samples.astype(np.float32))
