"""Exception hierarchy shared by every dafjam module.

``ValidationError`` carries a ``field``/``reason`` pair so that the control
service can map any invariant violation straight to its HTTP error shape.
"""


class DafJamError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DafJamError, ValueError):
    """A supplied value violates a documented invariant."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class TemperatureOutOfRange(ValidationError):
    """Air temperature outside the range where the linear sound-speed model holds."""


class GainOutOfRange(ValidationError):
    """Gain outside the supported [-60, +24] dB window."""


class InvalidConfig(ValidationError):
    """Engine or session configuration outside its supported envelope."""


class DistanceTooFar(DafJamError):
    """Target farther than the range reachable for the requested feedback delay."""

    def __init__(self, distance_m: float, max_distance_m: float, d_daf_s: float):
        self.distance_m = distance_m
        self.max_distance_m = max_distance_m
        self.d_daf_s = d_daf_s
        super().__init__(
            f"distance {distance_m:g} m exceeds the maximum distance "
            f"{max_distance_m:.2f} m reachable for a {d_daf_s:g} s feedback-delay target"
        )


class SampleRateMismatch(DafJamError):
    """Buffer sample rate differs from the rate the consumer was built for."""


class UnsupportedFormat(DafJamError):
    """WAV file is valid RIFF but not mono 16-bit linear PCM."""


class CorruptHeader(DafJamError):
    """File is not a well-formed RIFF/WAVE container."""


class NoPeak(DafJamError):
    """Cross-correlation found no credible feedback component in the mix."""


class SubscriberOverflow(DafJamError):
    """Telemetry subscriber fell too far behind and was disconnected."""
