"""HTTP + WebSocket control session for a live jammer.

One Session owns the device state.  Control operations validate a whole
candidate state first and then publish it as an immutable snapshot; the
audio path adopts the newest snapshot at block boundaries and never takes
a lock, so a flood of control traffic cannot stall or tear block
processing.  A telemetry pump emits one frame per tick to every
subscriber; subscribers that cannot keep up are dropped rather than
back-pressuring anything.

The HTTP surface (FastAPI):
  GET  /api/state               full session snapshot
  PATCH /api/params             partial device-state update, 422 on bad fields
  POST /api/trigger             {"pressed": bool}
  GET  /api/physics             delay arithmetic for given target/distance/temperature
  WS   /api/telemetry           telemetry frames at 10 Hz
Validation failures return HTTP 422 with {"field", "reason"}.
"""

from __future__ import annotations

import asyncio
import contextlib
import dataclasses
import math
import threading
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from fastapi import FastAPI, Request, WebSocket
from fastapi.responses import JSONResponse

from .audio import AudioBuffer
from .device import DeviceMode, DeviceState, resolve_params
from .engine import Engine, JamParams, delay_at
from .errors import DistanceTooFar, ValidationError
from .physics import Environment, PathModel, artificial_delay, max_distance
from . import wavio

TELEMETRY_RATE_HZ = 10.0
TELEMETRY_QUEUE_LIMIT = 64

# Displayed level for silence; keeps the JSON finite.
SILENCE_DB = -120.0

_BOOL_FIELDS = {"trigger_pressed", "laser_on"}
_FLOAT_FIELDS = {
    "measured_distance_m",
    "d_daf_target_s",
    "temperature_c",
    "input_gain_db",
    "output_gain_db",
    "periodic_base_s",
    "periodic_amplitude_s",
    "periodic_frequency_hz",
}
_PATCH_ALIASES = {"distance_m": "measured_distance_m"}


@dataclass(frozen=True)
class Snapshot:
    """One published parameter set; never mutated after publication."""

    version: int
    device: DeviceState
    params: JamParams
    clamped: bool
    wall_epoch: float  # monotonic time origin for displayed periodic phase


def _coerce_field(name: str, value):
    if name == "rotary":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError("rotary", f"{value!r} must be an integer 0..7")
        return value
    if name == "mode":
        return DeviceMode.parse(value)
    if name in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ValidationError(name, f"{value!r} must be a boolean")
        return value
    if name in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(name, f"{value!r} must be a number")
        if not math.isfinite(float(value)):
            raise ValidationError(name, f"{value!r} must be finite")
        return float(value)
    raise ValidationError(name, "unknown parameter")


def device_to_json(state: DeviceState) -> dict:
    out = dataclasses.asdict(state)
    out["mode"] = state.mode.value
    return out


def params_to_json(params: JamParams) -> dict:
    spec = params.modulation
    return {
        "modulation": {
            "kind": spec.kind.value,
            "base_s": spec.base_s,
            "amplitude_s": spec.amplitude_s,
            "frequency_hz": spec.frequency_hz,
        },
        "gains": {
            "input_gain_db": params.gains.input_gain_db,
            "output_gain_db": params.gains.output_gain_db,
            "muted": params.gains.muted,
        },
        "environment": {
            "temperature_c": params.environment.temperature_c,
            "distance_m": params.environment.distance_m,
        },
        "path": params.path.value,
        "epoch_s": params.epoch_s,
    }


class Session:
    """Owns device state, publishes snapshots, drives file-mode processing.

    One writer at a time (updates serialize on an internal lock); any
    number of readers; the audio path only ever reads the published
    snapshot reference, which Python swaps atomically.
    """

    def __init__(
        self,
        sample_rate_hz: int = 48000,
        max_delay_s: float = 2.0,
        device: Optional[DeviceState] = None,
        source: Optional[dict] = None,
    ):
        self.sample_rate_hz = int(sample_rate_hz)
        self.max_delay_s = float(max_delay_s)
        self.source = source or {"kind": "live_stub"}
        self.running = True
        self.telemetry_seq = 0
        self._lock = threading.Lock()
        self._history: List[Snapshot] = []
        self._rms_in_db = SILENCE_DB
        self._rms_out_db = SILENCE_DB
        initial = device if device is not None else DeviceState()
        self._published = self._build_snapshot(0, initial, time.monotonic())
        self._history.append(self._published)

    @classmethod
    def from_config(cls, config: dict) -> "Session":
        """Seed a session from a JSON config: engine block plus device fields."""
        engine_cfg = config.get("engine", {})
        device_fields = {}
        for name, value in config.get("device", {}).items():
            target = _PATCH_ALIASES.get(name, name)
            device_fields[target] = _coerce_field(target, value)
        return cls(
            sample_rate_hz=engine_cfg.get("sample_rate_hz", 48000),
            max_delay_s=engine_cfg.get("max_delay_s", 2.0),
            device=DeviceState(**device_fields) if device_fields else None,
        )

    @staticmethod
    def _build_snapshot(version: int, device: DeviceState, wall_epoch: float) -> Snapshot:
        params, clamped = resolve_params(device, clamp_out_of_range=True)
        return Snapshot(version, device, params, clamped, wall_epoch)

    @property
    def snapshot(self) -> Snapshot:
        return self._published

    @property
    def history(self) -> Tuple[Snapshot, ...]:
        with self._lock:
            return tuple(self._history)

    def update_params(self, patch: dict) -> Snapshot:
        """Validate a partial device-state patch and publish atomically.

        The whole patch is rejected on the first invalid field; a published
        snapshot never mixes old and new values.
        """
        if not isinstance(patch, dict):
            raise ValidationError("body", "patch must be a JSON object")
        fields = {}
        for name, value in patch.items():
            target = _PATCH_ALIASES.get(name, name)
            fields[target] = _coerce_field(target, value)
        with self._lock:
            old = self._published
            candidate = dataclasses.replace(old.device, **fields)
            wall_epoch = old.wall_epoch
            if candidate.mode is not old.device.mode:
                wall_epoch = time.monotonic()
            snap = self._build_snapshot(old.version + 1, candidate, wall_epoch)
            self._published = snap
            self._history.append(snap)
            return snap

    def trigger(self, pressed) -> Snapshot:
        if not isinstance(pressed, bool):
            raise ValidationError("pressed", f"{pressed!r} must be a boolean")
        return self.update_params({"trigger_pressed": pressed})

    def state_json(self) -> dict:
        snap = self._published
        return {
            "device": device_to_json(snap.device),
            "engine_config": {
                "sample_rate_hz": self.sample_rate_hz,
                "max_delay_s": self.max_delay_s,
            },
            "running": self.running,
            "source": self.source,
            "telemetry_seq": self.telemetry_seq,
            "params": params_to_json(snap.params),
            "clamped": snap.clamped,
            "version": snap.version,
        }

    def telemetry_frame(self, seq: int) -> dict:
        snap = self._published
        t = max(0.0, time.monotonic() - snap.wall_epoch)
        delay_ms = delay_at(snap.params.modulation, t) * 1000.0
        muted = snap.params.gains.muted
        self.telemetry_seq = seq
        return {
            "seq": seq,
            "wall_time_s": time.time(),
            "instantaneous_delay_ms": delay_ms,
            "muted": muted,
            "rms_in_db": self._rms_in_db,
            "rms_out_db": SILENCE_DB if muted else self._rms_out_db,
            "distance_m": snap.device.measured_distance_m,
            "clamped": snap.clamped,
        }

    def _note_levels(self, block_in: np.ndarray, block_out: np.ndarray) -> None:
        def to_db(x: np.ndarray) -> float:
            rms = float(np.sqrt(np.mean(x * x))) if len(x) else 0.0
            return max(SILENCE_DB, 20.0 * math.log10(rms)) if rms > 0 else SILENCE_DB

        self._rms_in_db = to_db(block_in)
        self._rms_out_db = to_db(block_out)

    def process_buffer(
        self, dry: AudioBuffer, block_samples: int = 480
    ) -> "tuple[AudioBuffer, list[tuple[int, int]]]":
        """Run a buffer through an engine, adopting snapshots at block
        boundaries.

        Returns the output and the adoption log [(block_idx, version), ...]
        recording exactly which published version took effect at which
        block, so a replay with the same adoptions must match bitwise.
        """
        engine = Engine(dry.sample_rate_hz, self.max_delay_s)
        out = np.empty(len(dry))
        adoptions: list[tuple[int, int]] = []
        adopted_version = -1
        block_idx = 0
        for start in range(0, len(dry), block_samples):
            snap = self._published
            if snap.version != adopted_version:
                engine.set_params(snap.params)
                adopted_version = snap.version
                adoptions.append((block_idx, snap.version))
            block = AudioBuffer(dry.sample_rate_hz, dry.samples[start : start + block_samples])
            result = engine.process_block(block)
            out[start : start + len(result)] = result.samples
            self._note_levels(block.samples, result.samples)
            block_idx += 1
        return AudioBuffer(dry.sample_rate_hz, out), adoptions

    def process_file(
        self, in_path, out_path, block_samples: int = 480
    ) -> "list[tuple[int, int]]":
        """File-backed session: WAV in, engine, WAV out; returns the adoption log."""
        dry = wavio.read_wav(in_path)
        self.source = {"kind": "file", "path": str(in_path), "loop": False}
        try:
            result, adoptions = self.process_buffer(dry, block_samples)
        finally:
            self.source = {"kind": "live_stub"}
        wavio.write_wav(out_path, result)
        return adoptions


def replay_with_adoptions(
    dry: AudioBuffer,
    versions: "dict[int, JamParams]",
    adoptions: "list[tuple[int, int]]",
    block_samples: int = 480,
    max_delay_s: float = 2.0,
) -> AudioBuffer:
    """Reference run for isolation testing: apply recorded parameter sets at
    their recorded block boundaries, nothing in between."""
    engine = Engine(dry.sample_rate_hz, max_delay_s)
    schedule = dict(adoptions)
    out = np.empty(len(dry))
    block_idx = 0
    for start in range(0, len(dry), block_samples):
        if block_idx in schedule:
            engine.set_params(versions[schedule[block_idx]])
        block = AudioBuffer(dry.sample_rate_hz, dry.samples[start : start + block_samples])
        out[start : start + block_samples] = engine.process_block(block).samples
        block_idx += 1
    return AudioBuffer(dry.sample_rate_hz, out)


# --- HTTP/WS app -----------------------------------------------------------


def create_app(session: Optional[Session] = None, ui_dir: Optional[str] = None):
    """Build a FastAPI app bound to one session.

    The telemetry pump runs for the app's lifespan and fans each frame out
    to every connected WebSocket; a subscriber whose queue overflows is
    disconnected.
    """
    session = session or Session()
    subscribers: "set[asyncio.Queue]" = set()

    async def pump():
        seq = 0
        interval = 1.0 / TELEMETRY_RATE_HZ
        while True:
            seq += 1
            frame = session.telemetry_frame(seq)
            for q in list(subscribers):
                try:
                    q.put_nowait(frame)
                except asyncio.QueueFull:
                    subscribers.discard(q)
                    # Make room for the overflow sentinel so the handler
                    # wakes up and closes the socket.
                    with contextlib.suppress(asyncio.QueueEmpty, asyncio.QueueFull):
                        q.get_nowait()
                        q.put_nowait(None)
            await asyncio.sleep(interval)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(pump())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(title="dafjam control", lifespan=lifespan)
    app.state.session = session

    @app.exception_handler(ValidationError)
    async def on_validation_error(request, exc: ValidationError):
        return JSONResponse(status_code=422, content={"field": exc.field, "reason": exc.reason})

    @app.exception_handler(DistanceTooFar)
    async def on_distance_too_far(request, exc: DistanceTooFar):
        return JSONResponse(status_code=422, content={"field": "distance_m", "reason": str(exc)})

    async def read_json_object(request: Request) -> dict:
        try:
            payload = await request.json()
        except Exception:
            raise ValidationError("body", "request body must be valid JSON") from None
        if not isinstance(payload, dict):
            raise ValidationError("body", "request body must be a JSON object")
        return payload

    @app.get("/api/state")
    async def get_state():
        return session.state_json()

    @app.patch("/api/params")
    async def patch_params(request: Request):
        session.update_params(await read_json_object(request))
        return session.state_json()

    @app.post("/api/trigger")
    async def post_trigger(request: Request):
        payload = await read_json_object(request)
        if "pressed" not in payload:
            raise ValidationError("pressed", "missing required field")
        snap = session.trigger(payload["pressed"])
        return {"pressed": snap.device.trigger_pressed, "muted": snap.params.gains.muted}

    @app.get("/api/physics")
    async def get_physics(request: Request):
        q = request.query_params

        def number(name: str, default=None) -> float:
            raw = q.get(name)
            if raw is None:
                if default is None:
                    raise ValidationError(name, "missing required query parameter")
                return default
            try:
                value = float(raw)
            except ValueError:
                raise ValidationError(name, f"{raw!r} is not a number") from None
            if not math.isfinite(value):
                raise ValidationError(name, f"{raw!r} must be finite")
            return value

        d_daf_s = number("d_daf_s")
        temperature_c = number("temperature_c", 20.0)
        distance_m = number("distance_m", 0.0)
        path = PathModel.parse(q.get("path", "round_trip"))
        solution = artificial_delay(d_daf_s, Environment(temperature_c, distance_m), path)
        return {
            "v_mps": solution.speed_of_sound_mps,
            "artificial_delay_s": solution.artificial_delay_s,
            "max_distance_m": max_distance(d_daf_s, temperature_c, path),
        }

    @app.websocket("/api/telemetry")
    async def telemetry(ws: WebSocket):
        await ws.accept()
        q: asyncio.Queue = asyncio.Queue(maxsize=TELEMETRY_QUEUE_LIMIT)
        subscribers.add(q)
        try:
            while True:
                frame = await q.get()
                if frame is None:  # dropped for falling behind
                    await ws.close(code=1011, reason="telemetry subscriber overflow")
                    return
                await ws.send_json(frame)
        except Exception:
            pass
        finally:
            subscribers.discard(q)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    port: int = 8080,
    host: str = "127.0.0.1",
    config: Optional[dict] = None,
    ui_dir: Optional[str] = None,
    log_level: str = "info",
) -> None:
    """Run the control service until interrupted."""
    import uvicorn

    session = Session.from_config(config) if config else Session()
    app = create_app(session, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level=log_level)
