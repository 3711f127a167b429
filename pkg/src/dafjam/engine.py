"""Sample-accurate variable delay line: the jammer's signal path.

Signal flow per sample: input gain -> delay memory write -> fractional
delay read (linear interpolation between the two bracketing stored
samples) -> output gain -> mute gate.  The instantaneous delay follows a
modulation schedule (fixed, sinusoid, triangle or square wave of elapsed
stream time), evaluated per sample, so modulated delays produce the pitch
wobble of a physically moving read head.

Every per-sample quantity is derived from the absolute sample index, and
schedules are evaluated on windows aligned to absolute indices, so
processing the same stream in different block partitions yields bitwise
identical output.

Engines are single-threaded: hand a complete JamParams to set_params at a
block boundary (the control service publishes immutable snapshots and the
audio thread adopts the newest one between blocks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .audio import AudioBuffer
from .errors import GainOutOfRange, InvalidConfig, SampleRateMismatch, ValidationError
from .physics import Environment, PathModel

GAIN_MIN_DB = -60.0
GAIN_MAX_DB = 24.0

SAMPLE_RATE_MIN_HZ = 8000
SAMPLE_RATE_MAX_HZ = 192000

# Jamming remains effective well past one second of delay, so the line
# must hold more than that; 2 s leaves sweep headroom.
MAX_DELAY_CAPACITY_S = 2.0

# Fixed-delay target changes ramp linearly over this long to avoid clicks.
FIXED_DELAY_SLEW_S = 0.010

# Delay schedules are evaluated on windows aligned to absolute sample
# indices (cached per window), which makes the schedule values, and hence
# the output, independent of how callers partition the stream into blocks.
_WINDOW = 4096


class Waveform(Enum):
    FIXED = "fixed"
    SINUSOID = "sine"
    TRIANGLE = "triangle"
    SQUARE = "square"


def gain_to_linear(gain_db: float) -> float:
    """Decibel gain to linear amplitude factor (10^(dB/20))."""
    if not (GAIN_MIN_DB <= gain_db <= GAIN_MAX_DB):
        raise GainOutOfRange("gain_db", f"{gain_db!r} outside [{GAIN_MIN_DB:g}, {GAIN_MAX_DB:g}] dB")
    return 10.0 ** (gain_db / 20.0)


@dataclass(frozen=True)
class ModulationSpec:
    """Instantaneous-delay schedule: a waveform of elapsed time.

    The schedule value is base_s plus amplitude_s times a unit waveform in
    [-1, 1]; base_s - amplitude_s >= 0 keeps the delay nonnegative.
    """

    kind: Waveform
    base_s: float
    amplitude_s: float = 0.0
    frequency_hz: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.base_s) and self.base_s >= 0):
            raise ValidationError("base_s", f"{self.base_s!r} must be finite and >= 0")
        if not (math.isfinite(self.amplitude_s) and self.amplitude_s >= 0):
            raise ValidationError("amplitude_s", f"{self.amplitude_s!r} must be finite and >= 0")
        if self.base_s - self.amplitude_s < 0:
            raise ValidationError(
                "amplitude_s",
                f"amplitude {self.amplitude_s!r} exceeds base {self.base_s!r}; "
                "instantaneous delay would go negative",
            )
        if self.kind is Waveform.FIXED:
            if self.amplitude_s != 0.0:
                raise ValidationError("amplitude_s", "fixed schedule must have zero amplitude")
        else:
            if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0):
                raise ValidationError("frequency_hz", f"{self.frequency_hz!r} must be > 0 for a periodic schedule")

    @property
    def peak_delay_s(self) -> float:
        return self.base_s + self.amplitude_s

    @classmethod
    def fixed(cls, base_s: float) -> "ModulationSpec":
        return cls(Waveform.FIXED, base_s)

    @classmethod
    def sinusoid(cls, base_s: float, amplitude_s: float, frequency_hz: float) -> "ModulationSpec":
        return cls(Waveform.SINUSOID, base_s, amplitude_s, frequency_hz)

    @classmethod
    def triangle(cls, base_s: float, amplitude_s: float, frequency_hz: float) -> "ModulationSpec":
        return cls(Waveform.TRIANGLE, base_s, amplitude_s, frequency_hz)

    @classmethod
    def square(cls, base_s: float, amplitude_s: float, frequency_hz: float) -> "ModulationSpec":
        return cls(Waveform.SQUARE, base_s, amplitude_s, frequency_hz)


def delay_at(spec: ModulationSpec, t: Union[float, np.ndarray]):
    """Instantaneous delay in seconds at elapsed time t (scalar or array, t >= 0).

    Sinusoid: base + amp*sin(2*pi*f*t).  Triangle and square use unit waves
    in [-1, 1] phased like the sinusoid (zero/positive-going at t = 0).
    """
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0):
        raise ValidationError("t", "elapsed time must be >= 0")
    if spec.kind is Waveform.FIXED:
        out = np.full_like(arr, spec.base_s)
    elif spec.kind is Waveform.SINUSOID:
        out = spec.base_s + spec.amplitude_s * np.sin(2.0 * np.pi * spec.frequency_hz * arr)
    else:
        cycles = spec.frequency_hz * arr
        phase = cycles - np.floor(cycles)
        if spec.kind is Waveform.TRIANGLE:
            wave = np.where(
                phase < 0.25,
                4.0 * phase,
                np.where(phase < 0.75, 2.0 - 4.0 * phase, 4.0 * phase - 4.0),
            )
        else:  # SQUARE
            wave = np.where(phase < 0.5, 1.0, -1.0)
        out = spec.base_s + spec.amplitude_s * wave
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class GainStage:
    """Input/output amplifier gains plus the trigger-gated mute.

    Muted by default: output is exact silence until a trigger enables it.
    """

    input_gain_db: float = 0.0
    output_gain_db: float = 0.0
    muted: bool = True

    def __post_init__(self):
        for name in ("input_gain_db", "output_gain_db"):
            value = getattr(self, name)
            if not (GAIN_MIN_DB <= value <= GAIN_MAX_DB):
                raise GainOutOfRange(name, f"{value!r} outside [{GAIN_MIN_DB:g}, {GAIN_MAX_DB:g}] dB")


_DEFAULT_ENVIRONMENT = Environment(temperature_c=20.0, distance_m=0.0)


@dataclass(frozen=True)
class JamParams:
    """Complete engine configuration published as one immutable snapshot."""

    modulation: ModulationSpec
    gains: GainStage = GainStage()
    environment: Environment = _DEFAULT_ENVIRONMENT
    path: PathModel = PathModel.ROUND_TRIP
    epoch_s: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epoch_s) and self.epoch_s >= 0):
            raise ValidationError("epoch_s", f"{self.epoch_s!r} must be finite and >= 0")


_DEFAULT_PARAMS = JamParams(modulation=ModulationSpec.fixed(0.1))


class Engine:
    """Streaming variable delay line over a ring buffer.

    Consecutive process_block calls concatenate to the same result as one
    large block.  Not safe for concurrent process_block calls; set_params
    must be called between blocks.
    """

    def __init__(self, sample_rate_hz: int, max_delay_s: float = MAX_DELAY_CAPACITY_S):
        if (
            not isinstance(sample_rate_hz, (int, np.integer))
            or not SAMPLE_RATE_MIN_HZ <= sample_rate_hz <= SAMPLE_RATE_MAX_HZ
        ):
            raise InvalidConfig(
                "sample_rate_hz",
                f"{sample_rate_hz!r} outside [{SAMPLE_RATE_MIN_HZ}, {SAMPLE_RATE_MAX_HZ}] Hz",
            )
        if not 0 < max_delay_s <= MAX_DELAY_CAPACITY_S:
            raise InvalidConfig(
                "max_delay_s", f"{max_delay_s!r} outside (0, {MAX_DELAY_CAPACITY_S:g}] s"
            )
        self.sample_rate_hz = int(sample_rate_hz)
        self.max_delay_s = float(max_delay_s)
        # Delay memory proper, plus headroom so a whole schedule window can
        # be written before its reads without clobbering live history.
        self._capacity = math.ceil(self.max_delay_s * self.sample_rate_hz) + 2
        self._ring = self._capacity + _WINDOW
        self._mem = np.zeros(self._ring)
        self._n = 0  # absolute samples processed since construction
        self._params = _DEFAULT_PARAMS
        self._slew = None  # (start_sample, from_s, to_s, length_samples)
        self._window_cache = None  # (window_index, delays_s ndarray)

    @property
    def params(self) -> JamParams:
        return self._params

    @property
    def processed_samples(self) -> int:
        return self._n

    @property
    def delay_capacity_samples(self) -> int:
        return self._capacity

    def instantaneous_delay_s(self) -> float:
        """Effective delay that will apply to the next sample processed."""
        return self._delay_at_sample(self._n)

    def set_params(self, params: JamParams) -> None:
        """Adopt a new parameter snapshot, effective from the next sample.

        A changed fixed-delay target is slewed linearly over 10 ms (anchored
        to the absolute stream position, so partitioning does not matter);
        modulated schedules are followed exactly from their epoch.
        """
        if not isinstance(params, JamParams):
            raise InvalidConfig("params", "expected a JamParams snapshot")
        spec = params.modulation
        if spec.peak_delay_s > self.max_delay_s + 1e-12:
            raise InvalidConfig(
                "modulation",
                f"peak delay {spec.peak_delay_s:g} s exceeds engine capacity {self.max_delay_s:g} s",
            )
        if spec.kind is Waveform.FIXED:
            current = self._delay_at_sample(self._n)
            if self._n > 0 and current != spec.base_s:
                length = max(1, round(FIXED_DELAY_SLEW_S * self.sample_rate_hz))
                self._slew = (self._n, current, spec.base_s, length)
            else:
                self._slew = None
        else:
            self._slew = None
        self._params = params
        self._window_cache = None

    def _delay_at_sample(self, n: int) -> float:
        spec = self._params.modulation
        if spec.kind is Waveform.FIXED:
            if self._slew is None:
                return spec.base_s
            start, from_s, to_s, length = self._slew
            ramp = min(1.0, max(0.0, (n - start) / length))
            return to_s if ramp >= 1.0 else from_s + (to_s - from_s) * ramp
        t = max(0.0, n / self.sample_rate_hz - self._params.epoch_s)
        return delay_at(spec, t)

    def _window_delays(self, w: int) -> np.ndarray:
        """Schedule values for absolute samples [w*_WINDOW, (w+1)*_WINDOW)."""
        cache = self._window_cache
        if cache is not None and cache[0] == w:
            return cache[1]
        n = np.arange(w * _WINDOW, (w + 1) * _WINDOW, dtype=np.float64)
        spec = self._params.modulation
        if spec.kind is Waveform.FIXED:
            if self._slew is None:
                d = np.full(_WINDOW, spec.base_s)
            else:
                start, from_s, to_s, length = self._slew
                ramp = np.clip((n - start) / length, 0.0, 1.0)
                d = np.where(ramp >= 1.0, to_s, from_s + (to_s - from_s) * ramp)
        else:
            t = np.maximum(0.0, n / self.sample_rate_hz - self._params.epoch_s)
            d = delay_at(spec, t)
        self._window_cache = (w, d)
        return d

    def process_block(self, block: AudioBuffer) -> AudioBuffer:
        """Run one block through the delay line; streaming across calls.

        Muted engines emit exact zeros but still advance delay memory, so
        un-muting mid-stream reveals correctly delayed history.
        """
        if block.sample_rate_hz != self.sample_rate_hz:
            raise SampleRateMismatch(
                f"buffer at {block.sample_rate_hz} Hz, engine at {self.sample_rate_hz} Hz"
            )
        x = block.samples
        gains = self._params.gains
        g_in = gain_to_linear(gains.input_gain_db)
        g_out = gain_to_linear(gains.output_gain_db)
        total = len(x)
        out = np.zeros(total)
        n0 = self._n
        pos = 0
        while pos < total:
            a = n0 + pos
            w = a // _WINDOW
            b = min(n0 + total, (w + 1) * _WINDOW)
            m = b - a
            n = np.arange(a, b, dtype=np.int64)
            self._mem[n % self._ring] = g_in * x[pos : pos + m]
            if not gains.muted:
                ds = self._window_delays(w)[a - w * _WINDOW : b - w * _WINDOW] * self.sample_rate_hz
                k = np.floor(ds).astype(np.int64)
                frac = ds - k
                r = n - k
                s0 = self._mem[r % self._ring]
                s1 = self._mem[(r - 1) % self._ring]
                out[pos : pos + m] = g_out * ((1.0 - frac) * s0 + frac * s1)
            pos += m
        self._n = n0 + total
        return AudioBuffer(self.sample_rate_hz, out)


def create_engine(sample_rate_hz: int, max_delay_s: float = MAX_DELAY_CAPACITY_S) -> Engine:
    """Build an engine with zeroed delay memory and default parameters
    (fixed 0.1 s delay, unity gains, muted)."""
    return Engine(sample_rate_hz, max_delay_s)
