"""Binary PGM (P5) image I/O.

Amplitude images travel as 8- or 16-bit PGM (16-bit big-endian per the
format). Phase maps export as 8-bit PGM where pixel value v encodes phase
2*pi*v/256, with a `<path>.meta` sidecar holding the optical metadata that
PGM cannot carry.
"""
from __future__ import annotations

import os

import numpy as np

from .types import (
    DEFAULT_PIXEL_PITCH_UM,
    DEFAULT_WAVELENGTH_NM,
    TWO_PI,
    AmplitudeImage,
    PhaseMap,
)

PHASE_LEVELS = 256


def write_pgm(path: str | os.PathLike, pixels: np.ndarray) -> None:
    """Write a uint8 or uint16 array as binary PGM."""
    px = np.asarray(pixels)
    if px.ndim != 2:
        raise ValueError("PGM data must be 2-D")
    if px.dtype == np.uint8:
        maxval = 255
        payload = px.tobytes()
    elif px.dtype == np.uint16:
        maxval = 65535
        payload = px.astype(">u2").tobytes()
    else:
        raise ValueError(f"PGM requires uint8 or uint16 pixels, got {px.dtype}")
    h, w = px.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + payload)


def _read_header_tokens(data: bytes) -> tuple[list[bytes], int]:
    """Magic, width, height, maxval; comments (#) allowed between tokens.
    Returns the tokens and the offset where binary pixels begin."""
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise ValueError("truncated PGM header")
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < len(data) and not data[i:i + 1].isspace():
                i += 1
            tokens.append(data[start:i])
    # exactly one whitespace byte separates the maxval from the pixels
    return tokens, i + 1


def _parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    tokens, offset = _read_header_tokens(data)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM file: magic {tokens[0]!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ValueError("malformed PGM header") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ValueError("PGM dimensions or maxval out of range")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    body = data[offset:offset + need]
    if len(body) != need:
        raise ValueError(f"truncated PGM pixel data: {len(body)} of {need} bytes")
    px = np.frombuffer(body, dtype=dtype).reshape(h, w)
    return (px.astype(np.uint16) if maxval > 255 else px), maxval


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary PGM into uint8 (maxval <= 255) or uint16."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse_pgm(data)[0]


def save_amplitude(path: str | os.PathLike, img: AmplitudeImage,
                   bit_depth: int = 8) -> None:
    """Quantize an amplitude image linearly to full scale and write PGM."""
    if bit_depth not in (8, 16):
        raise ValueError("bit depth must be 8 or 16")
    maxval = 255 if bit_depth == 8 else 65535
    peak = float(np.max(img.pixels))
    scaled = img.pixels * (maxval / peak) if peak > 0 else img.pixels
    quant = np.clip(np.rint(scaled), 0, maxval)
    write_pgm(path, quant.astype(np.uint8 if bit_depth == 8 else np.uint16))


def load_amplitude(path: str | os.PathLike) -> AmplitudeImage:
    """Inverse of save_amplitude up to quantization: codes map back onto
    [0, 1] by the file's maxval."""
    with open(path, "rb") as fh:
        px, maxval = _parse_pgm(fh.read())
    return AmplitudeImage(px.astype(np.float64) / maxval)


def _meta_path(path: str | os.PathLike) -> str:
    return f"{os.fspath(path)}.meta"


def save_phase_map(path: str | os.PathLike, pm: PhaseMap) -> None:
    """Export phase as 8-bit PGM (value v encodes phase 2*pi*v/256) plus a
    sidecar metadata file."""
    codes = np.floor(pm.phase * (PHASE_LEVELS / TWO_PI))
    codes = np.clip(codes, 0, PHASE_LEVELS - 1).astype(np.uint8)
    write_pgm(path, codes)
    lines = [f"wavelength_nm={pm.wavelength_nm!r}",
             f"pixel_pitch_um={pm.pixel_pitch_um!r}"]
    if pm.seed is not None:
        lines.append(f"seed={pm.seed}")
    with open(_meta_path(path), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_phase_map(path: str | os.PathLike) -> PhaseMap:
    """Read an exported phase map; the sidecar is optional and defaults
    apply when it is absent."""
    codes = read_pgm(path)
    if codes.dtype != np.uint8:
        raise ValueError("phase maps are 8-bit PGM")
    phase = codes.astype(np.float64) * (TWO_PI / PHASE_LEVELS)
    wavelength = DEFAULT_WAVELENGTH_NM
    pitch = DEFAULT_PIXEL_PITCH_UM
    seed: int | None = None
    meta = _meta_path(path)
    if os.path.exists(meta):
        with open(meta, encoding="ascii") as fh:
            for line in fh:
                key, _, value = line.strip().partition("=")
                if key == "wavelength_nm":
                    wavelength = float(value)
                elif key == "pixel_pitch_um":
                    pitch = float(value)
                elif key == "seed":
                    seed = int(value)
    return PhaseMap(phase, wavelength, pitch, seed)
