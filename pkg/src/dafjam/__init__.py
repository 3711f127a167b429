"""dafjam: a delayed-auditory-feedback speech-jamming toolkit.

Feeds a speaker's own voice back to them a fraction of a second late,
which reliably disrupts fluent speech.  The package models the whole
chain: the delay arithmetic against air travel time, a sample-accurate
variable delay line with modulation schedules, the handheld jamming-gun
control surface, an offline acoustic simulator with delay measurement,
WAV I/O, and an HTTP/WebSocket control service with live telemetry.
"""

from .audio import AudioBuffer, fractional_delay
from .device import (
    DeviceMode,
    DeviceState,
    ResolvedParams,
    press_trigger,
    resolve_params,
    rotary_to_delay,
    set_laser,
    ROTARY_MAX_DELAY_S,
    ROTARY_MIN_DELAY_S,
)
from .engine import (
    Engine,
    GainStage,
    JamParams,
    ModulationSpec,
    Waveform,
    create_engine,
    delay_at,
    gain_to_linear,
)
from .errors import (
    CorruptHeader,
    DafJamError,
    DistanceTooFar,
    GainOutOfRange,
    InvalidConfig,
    NoPeak,
    SampleRateMismatch,
    SubscriberOverflow,
    TemperatureOutOfRange,
    UnsupportedFormat,
    ValidationError,
)
from .physics import (
    DelaySolution,
    Environment,
    PathModel,
    artificial_delay,
    max_distance,
    speed_of_sound,
)
from .simulator import (
    SimulationConfig,
    SimulationReport,
    SweepRow,
    measure_feedback_delay,
    measure_lag_trace,
    render_session,
    run_sweep,
    simulate_session,
    write_sweep_csv,
)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "AudioBuffer",
    "fractional_delay",
    "DeviceMode",
    "DeviceState",
    "ResolvedParams",
    "press_trigger",
    "resolve_params",
    "rotary_to_delay",
    "set_laser",
    "ROTARY_MAX_DELAY_S",
    "ROTARY_MIN_DELAY_S",
    "Engine",
    "GainStage",
    "JamParams",
    "ModulationSpec",
    "Waveform",
    "create_engine",
    "delay_at",
    "gain_to_linear",
    "CorruptHeader",
    "DafJamError",
    "DistanceTooFar",
    "GainOutOfRange",
    "InvalidConfig",
    "NoPeak",
    "SampleRateMismatch",
    "SubscriberOverflow",
    "TemperatureOutOfRange",
    "UnsupportedFormat",
    "ValidationError",
    "DelaySolution",
    "Environment",
    "PathModel",
    "artificial_delay",
    "max_distance",
    "speed_of_sound",
    "SimulationConfig",
    "SimulationReport",
    "SweepRow",
    "measure_feedback_delay",
    "measure_lag_trace",
    "render_session",
    "run_sweep",
    "simulate_session",
    "write_sweep_csv",
    "read_wav",
    "write_wav",
    "__version__",
]
