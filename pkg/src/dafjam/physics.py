"""Acoustic-path delay arithmetic.

A jammer feeds a speaker's voice back to them after a total feedback delay
that is the sum of the artificial delay inserted by the device and the time
the sound spends in the air.  Given a target total delay, the distance to
the speaker and the air temperature, these helpers solve for the artificial
delay the device must insert, and for the maximum distance at which the
target is still reachable.

Two deployment geometries are supported: a round-trip path (a portable
device that both picks up and plays back over the same air gap, so the
signal crosses it twice) and a one-way path (wired microphones feeding room
speakers, one air crossing).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DistanceTooFar, TemperatureOutOfRange, ValidationError

# Speed of sound in dry air at 1 atm, linear in temperature (Celsius).
SPEED_OF_SOUND_0C_MPS = 331.5
SPEED_OF_SOUND_PER_DEGREE = 0.61

# The linear model is only credible near ambient conditions.
TEMPERATURE_MIN_C = -40.0
TEMPERATURE_MAX_C = 60.0

# Roundoff guard so that a target sitting exactly on the feasibility
# boundary (x == max_distance) solves to zero instead of erroring.
_FEASIBILITY_EPS_S = 1e-12


class PathModel(Enum):
    """Number of times the signal crosses the air gap on its way back to the speaker."""

    ROUND_TRIP = "round_trip"
    ONE_WAY = "one_way"

    @property
    def air_legs(self) -> int:
        return 2 if self is PathModel.ROUND_TRIP else 1

    @classmethod
    def parse(cls, text: str) -> "PathModel":
        """Accept 'round_trip'/'round-trip'/'one_way'/'one-way' (case-insensitive)."""
        normalized = text.strip().lower().replace("-", "_")
        for member in cls:
            if member.value == normalized:
                return member
        raise ValidationError("path", f"unknown path model {text!r}")


@dataclass(frozen=True)
class Environment:
    """Where the target speaker stands relative to the device."""

    temperature_c: float
    distance_m: float

    def __post_init__(self):
        if not (TEMPERATURE_MIN_C <= self.temperature_c <= TEMPERATURE_MAX_C):
            raise TemperatureOutOfRange(
                "temperature_c",
                f"{self.temperature_c!r} outside [{TEMPERATURE_MIN_C:g}, {TEMPERATURE_MAX_C:g}] degC",
            )
        if not self.distance_m >= 0:
            raise ValidationError("distance_m", f"{self.distance_m!r} must be >= 0")


@dataclass(frozen=True)
class DelaySolution:
    """Breakdown of a total feedback delay into device and air contributions."""

    artificial_delay_s: float
    air_delay_s: float
    speed_of_sound_mps: float
    total_feedback_delay_s: float


def speed_of_sound(temperature_c: float) -> float:
    """Speed of sound in air, m/s, for a temperature in the supported range."""
    if not (TEMPERATURE_MIN_C <= temperature_c <= TEMPERATURE_MAX_C):
        raise TemperatureOutOfRange(
            "temperature_c",
            f"{temperature_c!r} outside [{TEMPERATURE_MIN_C:g}, {TEMPERATURE_MAX_C:g}] degC",
        )
    return SPEED_OF_SOUND_0C_MPS + SPEED_OF_SOUND_PER_DEGREE * temperature_c


def artificial_delay(d_daf_s: float, env: Environment, path: PathModel) -> DelaySolution:
    """Solve for the delay the device must insert so device + air equals the target.

    Raises DistanceTooFar when the air travel alone already exceeds the
    target total delay.
    """
    if not d_daf_s > 0:
        raise ValidationError("d_daf_s", f"{d_daf_s!r} must be > 0")
    v = speed_of_sound(env.temperature_c)
    air_delay_s = path.air_legs * env.distance_m / v
    artificial = d_daf_s - air_delay_s
    if artificial < 0:
        if artificial >= -_FEASIBILITY_EPS_S:
            artificial = 0.0
        else:
            raise DistanceTooFar(
                env.distance_m, max_distance(d_daf_s, env.temperature_c, path), d_daf_s
            )
    return DelaySolution(
        artificial_delay_s=artificial,
        air_delay_s=air_delay_s,
        speed_of_sound_mps=v,
        total_feedback_delay_s=d_daf_s,
    )


def max_distance(d_daf_s: float, temperature_c: float, path: PathModel) -> float:
    """Largest distance at which the total feedback-delay target is reachable."""
    if not d_daf_s >= 0:
        raise ValidationError("d_daf_s", f"{d_daf_s!r} must be >= 0")
    return speed_of_sound(temperature_c) * d_daf_s / path.air_legs
