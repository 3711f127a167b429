"""Portable jamming-gun control surface.

Models the handheld device's operator-facing state: an 8-position rotary
switch on the back selecting the delay, a mode selector (manual delay,
distance-driven automatic delay, or periodic delay waveforms), a pistol
trigger that un-mutes the amplifiers while held, a laser sight for aiming,
a distance meter reading, and input/output gain knobs.

DeviceState is an immutable value; transitions (trigger, laser) produce
new states, so snapshots can be shared across threads freely.
resolve_params turns a state into the engine's JamParams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

from .engine import GAIN_MAX_DB, GAIN_MIN_DB, GainStage, JamParams, ModulationSpec
from .errors import DistanceTooFar, GainOutOfRange, ValidationError
from .physics import (
    Environment,
    PathModel,
    artificial_delay,
)

# Delay IC range of the handheld prototype.
ROTARY_MIN_DELAY_S = 0.0092
ROTARY_MAX_DELAY_S = 0.192
ROTARY_POSITIONS = 8

DEFAULT_PERIODIC_BASE_S = 0.10
DEFAULT_PERIODIC_AMPLITUDE_S = 0.05
DEFAULT_PERIODIC_FREQUENCY_HZ = 1.0


class DeviceMode(Enum):
    MANUAL_DELAY = "manual_delay"
    AUTO_DISTANCE = "auto_distance"
    PERIODIC_SINE = "periodic_sine"
    PERIODIC_TRIANGLE = "periodic_triangle"
    PERIODIC_SQUARE = "periodic_square"

    @classmethod
    def parse(cls, text: str) -> "DeviceMode":
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError("mode", f"{text!r} is not one of: {valid}") from None


_PERIODIC_WAVEFORMS = {
    DeviceMode.PERIODIC_SINE: ModulationSpec.sinusoid,
    DeviceMode.PERIODIC_TRIANGLE: ModulationSpec.triangle,
    DeviceMode.PERIODIC_SQUARE: ModulationSpec.square,
}


def rotary_to_delay(position: int) -> float:
    """Delay selected by a rotary detent: linear over the IC range.

    Position 0 gives exactly 0.0092 s, position 7 exactly 0.192 s.
    """
    if not isinstance(position, int) or not 0 <= position < ROTARY_POSITIONS:
        raise ValidationError("rotary", f"{position!r} out of range 0..{ROTARY_POSITIONS - 1}")
    p = position / (ROTARY_POSITIONS - 1)
    # Affine blend keeps both endpoints exact in floating point.
    return ROTARY_MIN_DELAY_S * (1.0 - p) + ROTARY_MAX_DELAY_S * p


@dataclass(frozen=True)
class DeviceState:
    """Everything the operator can set from the device's controls."""

    rotary: int = 0
    mode: DeviceMode = DeviceMode.MANUAL_DELAY
    trigger_pressed: bool = False
    laser_on: bool = False
    measured_distance_m: float = 0.0
    d_daf_target_s: float = 0.2
    temperature_c: float = 20.0
    input_gain_db: float = 0.0
    output_gain_db: float = 0.0
    periodic_base_s: float = DEFAULT_PERIODIC_BASE_S
    periodic_amplitude_s: float = DEFAULT_PERIODIC_AMPLITUDE_S
    periodic_frequency_hz: float = DEFAULT_PERIODIC_FREQUENCY_HZ

    def __post_init__(self):
        if not isinstance(self.rotary, int) or not 0 <= self.rotary < ROTARY_POSITIONS:
            raise ValidationError("rotary", f"{self.rotary!r} out of range 0..{ROTARY_POSITIONS - 1}")
        if not isinstance(self.mode, DeviceMode):
            raise ValidationError("mode", f"{self.mode!r} is not a DeviceMode")
        if not (math.isfinite(self.d_daf_target_s) and self.d_daf_target_s >= 0):
            raise ValidationError("d_daf_target_s", f"{self.d_daf_target_s!r} must be finite and >= 0")
        # Environment validates temperature range and distance sign.
        Environment(temperature_c=self.temperature_c, distance_m=self.measured_distance_m)
        for name in ("input_gain_db", "output_gain_db"):
            value = getattr(self, name)
            if not (GAIN_MIN_DB <= value <= GAIN_MAX_DB):
                raise GainOutOfRange(name, f"{value!r} outside [{GAIN_MIN_DB:g}, {GAIN_MAX_DB:g}] dB")
        if not (math.isfinite(self.periodic_base_s) and self.periodic_base_s >= 0):
            raise ValidationError("periodic_base_s", f"{self.periodic_base_s!r} must be finite and >= 0")
        if not (math.isfinite(self.periodic_amplitude_s) and self.periodic_amplitude_s >= 0):
            raise ValidationError(
                "periodic_amplitude_s", f"{self.periodic_amplitude_s!r} must be finite and >= 0"
            )
        if not (math.isfinite(self.periodic_frequency_hz) and self.periodic_frequency_hz > 0):
            raise ValidationError(
                "periodic_frequency_hz", f"{self.periodic_frequency_hz!r} must be finite and > 0"
            )


class ResolvedParams(NamedTuple):
    params: JamParams
    clamped: bool


def resolve_params(
    state: DeviceState,
    *,
    epoch_s: float = 0.0,
    clamp_out_of_range: bool = False,
) -> ResolvedParams:
    """Map a device state onto engine parameters.

    ManualDelay takes the rotary detent's delay; AutoDistance computes the
    artificial delay for the target total feedback delay at the measured
    distance (round trip) and clamps it into the IC range; periodic modes
    build the corresponding waveform from the device's base/amplitude/
    frequency settings, clipped into the IC range.  clamped reports whether
    any clipping happened.  The trigger gates the mute: released means
    muted.

    AutoDistance beyond the reachable distance raises DistanceTooFar unless
    clamp_out_of_range is set, in which case the delay pins at the IC
    minimum (the hardware cannot go lower) and clamped is reported.
    """
    clamped = False
    if state.mode is DeviceMode.MANUAL_DELAY:
        spec = ModulationSpec.fixed(rotary_to_delay(state.rotary))
    elif state.mode is DeviceMode.AUTO_DISTANCE:
        env = Environment(temperature_c=state.temperature_c, distance_m=state.measured_distance_m)
        try:
            raw = artificial_delay(state.d_daf_target_s, env, PathModel.ROUND_TRIP).artificial_delay_s
        except DistanceTooFar:
            if not clamp_out_of_range:
                raise
            raw = 0.0
        fixed = min(ROTARY_MAX_DELAY_S, max(ROTARY_MIN_DELAY_S, raw))
        clamped = fixed != raw
        spec = ModulationSpec.fixed(fixed)
    else:
        base = min(ROTARY_MAX_DELAY_S, max(ROTARY_MIN_DELAY_S, state.periodic_base_s))
        # Amplitude may not swing the delay outside the IC range.
        amp_limit = min(base - ROTARY_MIN_DELAY_S, ROTARY_MAX_DELAY_S - base)
        amp = min(state.periodic_amplitude_s, amp_limit)
        clamped = base != state.periodic_base_s or amp != state.periodic_amplitude_s
        spec = _PERIODIC_WAVEFORMS[state.mode](base, amp, state.periodic_frequency_hz)
    params = JamParams(
        modulation=spec,
        gains=GainStage(
            input_gain_db=state.input_gain_db,
            output_gain_db=state.output_gain_db,
            muted=not state.trigger_pressed,
        ),
        environment=Environment(
            temperature_c=state.temperature_c, distance_m=state.measured_distance_m
        ),
        path=PathModel.ROUND_TRIP,
        epoch_s=epoch_s,
    )
    return ResolvedParams(params, clamped)


def press_trigger(state: DeviceState, pressed: bool) -> DeviceState:
    """Trigger held un-mutes the output; releasing mutes again."""
    return replace(state, trigger_pressed=bool(pressed))


def set_laser(state: DeviceState, on: bool) -> DeviceState:
    """Aiming aid only; has no effect on the audio path."""
    return replace(state, laser_on=bool(on))
