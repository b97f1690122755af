"""Deterministic artifact writers: CSV tables, 16-bit PGM and PNG images.

All CSV output is UTF-8 with LF line endings, '.' decimal separator and 9
significant digits.  Images are 16-bit grayscale; phase maps span [0, 2*pi)
onto [0, 65535] and intensity maps are linear or dB-scaled with a floor.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .aperture import TWO_PI, PhaseMap
from .propagation import FieldSlice

__all__ = [
    "format_number",
    "write_csv",
    "gain_curve_rows",
    "phase_map_csv",
    "field_slice_csv",
    "phase_to_levels",
    "intensity_to_levels",
    "write_pgm16",
    "write_png16",
]


def format_number(x: float) -> str:
    """Format with 9 significant digits."""
    return f"{x:.9g}"


def write_csv(path: Path, header: str, rows: Iterable[Sequence]) -> None:
    """Write rows of numbers/strings under a fixed header, LF line endings."""
    lines = [header]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_number(v) for v in row))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def gain_curve_rows(curve) -> tuple[str, list[list[float]]]:
    """Bit-exact gain-curve CSV schema: z_m,beamforming,beamfocusing,bessel."""
    header = "z_m,beamforming,beamfocusing,bessel"
    rows = []
    for i, z in enumerate(curve.distances):
        rows.append(
            [
                float(z),
                float(curve.gain["beamforming"][i]),
                float(curve.gain["beamfocusing"][i]),
                float(curve.gain["bessel"][i]),
            ]
        )
    return header, rows


def phase_map_csv(path: Path, phase: PhaseMap) -> None:
    """Row-major phase values in radians, 9 significant digits."""
    lines = [",".join(format_number(v) for v in row) for row in phase.values]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def field_slice_csv(path: Path, slice_: FieldSlice) -> None:
    """Sample table with columns x, y, re, im, intensity."""
    X, Y = slice_.meshgrid()
    s = slice_.samples
    lines = ["x_m,y_m,re,im,intensity"]
    for iy in range(s.shape[0]):
        for ix in range(s.shape[1]):
            v = s[iy, ix]
            lines.append(
                ",".join(
                    format_number(val)
                    for val in (X[iy, ix], Y[iy, ix], v.real, v.imag, abs(v) ** 2)
                )
            )
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def phase_to_levels(phase: PhaseMap) -> np.ndarray:
    """Map [0, 2*pi) phase onto uint16 gray levels."""
    return np.round(phase.values / TWO_PI * 65535.0).astype(np.uint16)


def intensity_to_levels(slice_: FieldSlice, scale: str = "db", db_floor: float = -60.0) -> np.ndarray:
    """Map slice intensity onto uint16 levels, linear or dB with a floor."""
    if scale not in ("db", "linear"):
        raise ValueError(f"unknown intensity scale {scale!r}")
    if db_floor >= 0:
        raise ValueError(f"db_floor must be negative, got {db_floor}")
    intensity = slice_.intensity()
    peak = intensity.max()
    if peak <= 0.0:
        return np.zeros(intensity.shape, dtype=np.uint16)
    if scale == "linear":
        unit = intensity / peak
    else:
        floor_lin = 10.0 ** (db_floor / 10.0)
        db = 10.0 * np.log10(np.maximum(intensity / peak, floor_lin))
        unit = (db - db_floor) / (-db_floor)
    return np.round(unit * 65535.0).astype(np.uint16)


def write_pgm16(path: Path, levels: np.ndarray) -> None:
    """Binary (P5) 16-bit PGM, big-endian sample order."""
    arr = np.asarray(levels, dtype=np.uint16)
    h, w = arr.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + arr.astype(">u2").tobytes())


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_png16(path: Path, levels: np.ndarray) -> None:
    """Minimal 16-bit grayscale PNG writer (fixed zlib level, deterministic)."""
    arr = np.asarray(levels, dtype=np.uint16)
    h, w = arr.shape
    raw = arr.astype(">u2").tobytes()
    stride = w * 2
    scanlines = b"".join(b"\x00" + raw[y * stride : (y + 1) * stride] for y in range(h))
    ihdr = struct.pack(">IIBBBBB", w, h, 16, 0, 0, 0, 0)  # bit depth 16, grayscale
    data = (
        b"\x89PNG\r\n\x1a\n"
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(scanlines, 6))
        + _png_chunk(b"IEND", b"")
    )
    Path(path).write_bytes(data)
