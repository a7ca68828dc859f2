"""Pure-numpy fallback for the elementwise hologram kernels.

Mirrors _kernels_cy exactly; the engine picks one at import time. These
three operations dominate the per-iteration cost outside the FFT, so both
implementations keep them allocation-lean.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

TWO_PI = 2.0 * np.pi


def unit_field(phase: np.ndarray) -> np.ndarray:
    """exp(i*phase) as complex128."""
    out = np.empty(phase.shape, dtype=np.complex128)
    np.cos(phase, out=out.real)
    np.sin(phase, out=out.imag)
    return out


def apply_target_and_error(freq: np.ndarray, target: np.ndarray) -> float:
    """Replace |freq| with target in place, keeping phase, and return the
    raw squared modulus error sum((|freq| - target)**2) measured first.

    Zero-modulus bins take the target magnitude at phase 0.
    """
    mag = np.hypot(freq.real, freq.imag)
    diff = mag - target
    err = float(np.dot(diff.ravel(), diff.ravel()))
    zero = mag == 0.0
    mag[zero] = 1.0
    scale = target / mag
    freq *= scale
    if np.any(zero):
        freq[zero] = target[zero] + 0.0j
    return err


def wrapped_angle(field: np.ndarray) -> np.ndarray:
    """Phase of a complex field wrapped to [0, 2*pi)."""
    phase = np.arctan2(field.imag, field.real)
    np.remainder(phase, TWO_PI, out=phase)
    # remainder can return exactly 2*pi for tiny negative inputs
    phase[phase >= TWO_PI] = 0.0
    return phase
