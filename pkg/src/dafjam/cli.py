"""Command-line entry points.

Subcommands: jam (offline WAV through the delay engine), simulate
(end-to-end acoustic session with a measured report), physics (delay
arithmetic as JSON), sweep (grid verification to CSV), serve (HTTP/WS
control service).

Results go to stdout as JSON or CSV; diagnostics go to stderr.  Exit
codes: 0 success, 2 usage error, 3 file/IO error, 4 domain error (for
example a target beyond the reachable distance).  DAFJAM_LOG selects the
diagnostic level (error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from .audio import AudioBuffer
from .engine import GainStage, JamParams, ModulationSpec, Waveform, create_engine
from .errors import (
    CorruptHeader,
    DafJamError,
    UnsupportedFormat,
    ValidationError,
)
from .physics import Environment, PathModel, artificial_delay, max_distance
from .simulator import (
    SimulationConfig,
    run_sweep,
    simulate_session,
    write_sweep_csv,
)
from . import wavio

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DOMAIN = 4

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("dafjam")


def _configure_logging() -> str:
    name = os.environ.get("DAFJAM_LOG", "error").strip().lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        level = logging.ERROR
        name = "error"
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return name


def _print_json(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _modulation_from_args(args: argparse.Namespace) -> ModulationSpec:
    kind = Waveform(args.mode)
    if kind is Waveform.FIXED:
        return ModulationSpec.fixed(args.delay_s)
    return ModulationSpec(kind, args.delay_s, args.amplitude_s, args.frequency_hz)


def _add_modulation_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--mode", choices=[w.value for w in Waveform], default="fixed",
                     help="delay schedule waveform")
    sub.add_argument("--delay-s", type=float, default=0.1, help="base delay in seconds")
    sub.add_argument("--amplitude-s", type=float, default=0.0,
                     help="modulation depth in seconds (periodic modes)")
    sub.add_argument("--frequency-hz", type=float, default=1.0,
                     help="modulation rate in Hz (periodic modes)")


def cmd_jam(args: argparse.Namespace) -> int:
    dry = wavio.read_wav(args.infile)
    engine = create_engine(dry.sample_rate_hz)
    params = JamParams(
        modulation=_modulation_from_args(args),
        gains=GainStage(args.input_gain_db, args.output_gain_db, muted=False),
    )
    engine.set_params(params)
    wet = engine.process_block(dry)
    wavio.write_wav(args.outfile, wet)
    log.info("jam: %s -> %s (%d samples at %d Hz)",
             args.infile, args.outfile, len(wet), wet.sample_rate_hz)
    return EXIT_OK


def _noise(sample_rate_hz: int, duration_s: float, seed: int = 7) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    n = max(1, math.ceil(duration_s * sample_rate_hz))
    return AudioBuffer(sample_rate_hz, 0.5 * rng.standard_normal(n).clip(-1.9, 1.9))


def cmd_simulate(args: argparse.Namespace) -> int:
    env = Environment(temperature_c=args.temperature_c, distance_m=args.distance_m)
    path = PathModel.parse(args.path)
    solved = artificial_delay(args.d_daf_s, env, path)
    if args.mode == Waveform.FIXED.value:
        spec = ModulationSpec.fixed(solved.artificial_delay_s)
    else:
        spec = ModulationSpec(Waveform(args.mode), solved.artificial_delay_s,
                              args.amplitude_s, args.frequency_hz)
    params = JamParams(
        modulation=spec,
        gains=GainStage(muted=False),
        environment=env,
        path=path,
    )
    dry = wavio.read_wav(args.infile) if args.infile else _noise(args.sample_rate_hz, args.duration_s)
    cfg = SimulationConfig(
        params=params,
        d_daf_target_s=args.d_daf_s,
        natural_feedback_gain_db=args.natural_gain_db,
        feedback_gain_db=args.feedback_gain_db,
        sample_rate_hz=dry.sample_rate_hz,
    )
    mix, report = simulate_session(dry, cfg)
    if args.out_mix:
        wavio.write_wav(args.out_mix, mix)
    _print_json(
        {
            "measured_total_delay_s": report.measured_total_delay_s,
            "expected_total_delay_s": report.expected_total_delay_s,
            "per_leg": report.per_leg,
            "achieved_gain_ratio_db": report.achieved_gain_ratio_db,
            "pass": report.passed,
        }
    )
    return EXIT_OK if report.passed else EXIT_DOMAIN


def cmd_physics(args: argparse.Namespace) -> int:
    env = Environment(temperature_c=args.temperature_c, distance_m=args.distance_m)
    path = PathModel.parse(args.path)
    solution = artificial_delay(args.d_daf_s, env, path)
    _print_json(
        {
            "v_mps": solution.speed_of_sound_mps,
            "artificial_delay_s": solution.artificial_delay_s,
            "max_distance_m": max_distance(args.d_daf_s, args.temperature_c, path),
        }
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = None
    if args.grid:
        with open(args.grid) as f:
            grid = json.load(f)
    rows = run_sweep(grid, sample_rate_hz=args.sample_rate_hz)
    if args.outfile:
        write_sweep_csv(rows, args.outfile)
        log.info("sweep: wrote %d rows to %s", len(rows), args.outfile)
    else:
        write_sweep_csv(rows, sys.stdout)
    failures = sum(1 for row in rows if row.status == "fail")
    return EXIT_OK if failures == 0 else EXIT_DOMAIN


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    config = None
    if args.config:
        with open(args.config) as f:
            config = json.load(f)
    level = os.environ.get("DAFJAM_LOG", "error").strip().lower()
    serve(
        port=args.port,
        host=args.host,
        config=config,
        ui_dir=args.ui_dir,
        log_level=level if level in _LOG_LEVELS else "error",
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dafjam",
                                     description="Delayed-auditory-feedback jamming toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    jam = subs.add_parser("jam", help="process a WAV file through the delay engine")
    jam.add_argument("--in", dest="infile", required=True, help="input WAV (mono PCM16)")
    jam.add_argument("--out", dest="outfile", required=True, help="output WAV")
    _add_modulation_flags(jam)
    jam.add_argument("--input-gain-db", type=float, default=0.0)
    jam.add_argument("--output-gain-db", type=float, default=0.0)
    jam.set_defaults(func=cmd_jam)

    sim = subs.add_parser("simulate", help="simulate a session and report the achieved delay")
    sim.add_argument("--d-daf-s", type=float, required=True,
                     help="target total feedback delay in seconds")
    sim.add_argument("--distance-m", type=float, default=0.0)
    sim.add_argument("--temperature-c", type=float, default=20.0)
    sim.add_argument("--path", default="round-trip", help="round-trip or one-way")
    _add_modulation_flags(sim)
    sim.add_argument("--natural-gain-db", type=float, default=0.0)
    sim.add_argument("--feedback-gain-db", type=float, default=0.0)
    sim.add_argument("--sample-rate-hz", type=int, default=48000)
    sim.add_argument("--duration-s", type=float, default=0.5)
    sim.add_argument("--in", dest="infile", help="dry WAV input (defaults to a noise fixture)")
    sim.add_argument("--out-mix", help="write the at-ear mix to this WAV")
    sim.set_defaults(func=cmd_simulate)

    phys = subs.add_parser("physics", help="solve the delay/distance arithmetic")
    phys.add_argument("--d-daf-s", type=float, required=True)
    phys.add_argument("--temperature-c", type=float, default=20.0)
    phys.add_argument("--distance-m", type=float, default=0.0)
    phys.add_argument("--path", default="round-trip", help="round-trip or one-way")
    phys.set_defaults(func=cmd_physics)

    sweep = subs.add_parser("sweep", help="verify the delay identity over a parameter grid")
    sweep.add_argument("--grid", help="JSON file with d_daf_s/distance_m/temperature_c/modulation lists")
    sweep.add_argument("--out", dest="outfile", help="CSV output path (default: stdout)")
    sweep.add_argument("--sample-rate-hz", type=int, default=48000)
    sweep.set_defaults(func=cmd_sweep)

    srv = subs.add_parser("serve", help="run the HTTP/WebSocket control service")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--config", help="JSON file seeding the initial session state")
    srv.add_argument("--ui-dir", help="directory of control-panel static files to serve at /")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorruptHeader, UnsupportedFormat) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DafJamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
