"""Mono 16-bit PCM WAV files.

Only the format the rest of the pipeline produces and consumes: RIFF/WAVE,
linear PCM, little-endian, one channel, 16 bits.  Reads walk the chunk
list (skipping extras such as LIST or fact), writes emit the canonical
44-byte header.  Samples map to floats by dividing by 32768; writing
clamps to [-1, 1] before quantizing, so hot gain staging saturates rather
than wrapping.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .audio import AudioBuffer
from .errors import CorruptHeader, UnsupportedFormat

_PCM16_FULL_SCALE = 32768.0


def read_wav(path: Union[str, Path]) -> AudioBuffer:
    """Read a mono PCM16 WAV file into a float buffer in [-1, 1]."""
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise CorruptHeader(f"{path}: too short for a RIFF header")
    if raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise CorruptHeader(f"{path}: not a RIFF/WAVE file")

    fmt = None
    offset = 12
    while offset + 8 <= len(raw):
        chunk_id = raw[offset : offset + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, offset + 4)
        body = offset + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body + 16 > len(raw):
                raise CorruptHeader(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", raw, body)
        elif chunk_id == b"data":
            if fmt is None:
                raise CorruptHeader(f"{path}: data chunk before fmt chunk")
            audio_format, channels, sample_rate, _, _, bits = fmt
            if audio_format != 1:
                raise UnsupportedFormat(f"{path}: only linear PCM supported (format tag {audio_format})")
            if channels != 1:
                raise UnsupportedFormat(f"{path}: only mono supported ({channels} channels)")
            if bits != 16:
                raise UnsupportedFormat(f"{path}: only 16-bit supported ({bits}-bit)")
            if body + chunk_size > len(raw):
                raise CorruptHeader(f"{path}: data chunk truncated")
            pcm = np.frombuffer(raw, dtype="<i2", count=chunk_size // 2, offset=body)
            samples = pcm.astype(np.float64) / _PCM16_FULL_SCALE
            return AudioBuffer(int(sample_rate), samples)
        # Chunks are word-aligned; odd sizes carry a pad byte.
        offset = body + chunk_size + (chunk_size & 1)
    raise CorruptHeader(f"{path}: missing fmt or data chunk")


def write_wav(path: Union[str, Path], buffer: AudioBuffer) -> None:
    """Write a buffer as canonical 44-byte-header mono PCM16 WAV.

    Deterministic: the same buffer always produces a byte-identical file.
    """
    if not isinstance(buffer, AudioBuffer):
        raise TypeError("write_wav expects an AudioBuffer")
    clamped = np.clip(buffer.samples, -1.0, 1.0)
    pcm = np.clip(np.round(clamped * _PCM16_FULL_SCALE), -32768, 32767).astype("<i2")
    data = pcm.tobytes()
    sr = buffer.sample_rate_hz
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(data)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, 1, sr, sr * 2, 2, 16),
            b"data",
            struct.pack("<I", len(data)),
        ]
    )
    Path(path).write_bytes(header + data)
