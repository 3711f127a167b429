"""Mono audio buffers and the shared fractional-delay primitive."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass
class AudioBuffer:
    """Mono sampled signal; the unit all DSP stages consume and produce.

    Samples are float64, nominally in [-1, 1] (gain staging may exceed the
    nominal range; the WAV writer saturates on output).
    """

    sample_rate_hz: int
    samples: np.ndarray

    def __post_init__(self):
        if not isinstance(self.sample_rate_hz, (int, np.integer)) or self.sample_rate_hz <= 0:
            raise ValidationError("sample_rate_hz", f"{self.sample_rate_hz!r} must be a positive integer")
        self.sample_rate_hz = int(self.sample_rate_hz)
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("samples", "buffer must be one-dimensional (mono)")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValidationError("samples", "all samples must be finite")
        self.samples = arr

    @property
    def channel_count(self) -> int:
        return 1

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self) -> int:
        return len(self.samples)


def fractional_delay(samples: np.ndarray, delay_samples: float) -> np.ndarray:
    """Delay a signal by a (possibly fractional) number of samples.

    Linear interpolation between the two bracketing lattice positions:
    y[n] = (1-frac) * x[n-k] + frac * x[n-k-1], with zeros before the start
    of the signal.  Output has the same length as the input.
    """
    x = np.asarray(samples, dtype=np.float64)
    if not delay_samples >= 0:
        raise ValidationError("delay_samples", f"{delay_samples!r} must be >= 0")
    k = int(math.floor(delay_samples))
    frac = delay_samples - k

    def shifted(m: int) -> np.ndarray:
        out = np.zeros_like(x)
        if m < len(x):
            out[m:] = x[: len(x) - m] if m else x
        return out

    if frac == 0.0:
        return shifted(k)
    return (1.0 - frac) * shifted(k) + frac * shifted(k + 1)
