"""Hologram synthesis engine.

Implements the classic two-plane modulus-constraint retrieval loop on a
unitary 2-D DFT, plus phase-ramp view steering and angular multiplexing of
several users' views into one phase-only hologram. Elementwise hot loops
come from the selected kernel backend; the transforms stay on numpy's FFT.
"""
from __future__ import annotations

import numpy as np

from .backend import apply_target_and_error, unit_field, wrapped_angle
from .types import (
    TWO_PI,
    AmplitudeImage,
    GsResult,
    PhaseMap,
    ViewingZone,
    _require_power_of_two,
    check_disjoint,
)


def fft2_unitary(field: np.ndarray) -> np.ndarray:
    """Forward 2-D DFT with 1/sqrt(HW) scaling, so energy is preserved."""
    return np.fft.fft2(field, norm="ortho")


def ifft2_unitary(field: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(field, norm="ortho")


def reconstruct(pm: PhaseMap) -> AmplitudeImage:
    """Far-plane amplitude |F(exp(i*phase))| of a phase-only hologram."""
    h, w = pm.shape
    _require_power_of_two(h, "hologram height")
    _require_power_of_two(w, "hologram width")
    freq = fft2_unitary(unit_field(np.ascontiguousarray(pm.phase)))
    return AmplitudeImage(np.hypot(freq.real, freq.imag))


def scaled_target(pixels: np.ndarray) -> np.ndarray:
    """Rescale a target so its energy matches a unit-magnitude field (H*W)."""
    t = np.asarray(pixels, dtype=np.float64)
    energy = float(np.sum(t * t))
    if energy == 0.0:
        raise ValueError("target has zero energy")
    h, w = t.shape
    return t * np.sqrt(h * w / energy)


def _gs_loop(t_scaled: np.ndarray, iterations: int, rng: np.random.Generator,
             kernels=None) -> tuple[np.ndarray, list[float], float]:
    """Core retrieval loop. Returns (phase, per-iteration NMSE measured
    before the constraint, NMSE of the returned phase). `kernels`
    overrides the selected backend, used by the backend benchmark."""
    uf = kernels.unit_field if kernels else unit_field
    constrain = kernels.apply_target_and_error if kernels else apply_target_and_error
    wangle = kernels.wrapped_angle if kernels else wrapped_angle
    h, w = t_scaled.shape
    denom = float(np.sum(t_scaled * t_scaled))
    phase = rng.uniform(0.0, TWO_PI, size=(h, w))
    errors: list[float] = []
    for _ in range(iterations):
        freq = fft2_unitary(uf(phase))
        raw = constrain(freq, t_scaled)
        errors.append(raw / denom)
        phase = wangle(ifft2_unitary(freq))
    freq = fft2_unitary(uf(phase))
    diff = np.hypot(freq.real, freq.imag) - t_scaled
    final = float(np.sum(diff * diff)) / denom
    return phase, errors, final


def gerchberg_saxton(target: AmplitudeImage, iterations: int, seed: int) -> GsResult:
    """Retrieve a phase-only hologram whose far-plane amplitude approaches
    the target. The initial phase is uniform on [0, 2*pi) from the seeded
    generator, so results are bit-reproducible."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    t_scaled = scaled_target(target.pixels)
    rng = np.random.default_rng(seed)
    phase, errors, final = _gs_loop(t_scaled, iterations, rng)
    pm = PhaseMap(phase, seed=seed)
    return GsResult(phase_map=pm, error_history=tuple(errors),
                    final_nmse=final, iterations_run=iterations, seed=seed)


def phase_ramp(pm: PhaseMap, kx: int, ky: int) -> PhaseMap:
    """Add a linear ramp of (kx, ky) whole cycles, circularly steering the
    reconstruction by (kx, ky) pixels. Steering beyond half the grid would
    alias, so it is rejected."""
    h, w = pm.shape
    if abs(kx) >= w / 2 or abs(ky) >= h / 2:
        raise ValueError(f"steering ({kx}, {ky}) exceeds the +/-(W/2, H/2) alias limit")
    if kx == 0 and ky == 0:
        return pm
    y = np.arange(h, dtype=np.float64).reshape(-1, 1)
    x = np.arange(w, dtype=np.float64).reshape(1, -1)
    ramp = TWO_PI * (kx * x / w + ky * y / h)
    phase = np.remainder(pm.phase + ramp, TWO_PI)
    phase[phase >= TWO_PI] = 0.0
    return PhaseMap(phase, pm.wavelength_nm, pm.pixel_pitch_um, pm.seed)


def _next_pow2(n: int) -> int:
    p = 8
    while p < n:
        p *= 2
    return p


def embed_in_zone(pattern: np.ndarray, zone: ViewingZone,
                  width: int, height: int) -> np.ndarray:
    """Place a pattern centered inside its zone on an otherwise dark canvas."""
    ph, pw = pattern.shape
    if ph > zone.height or pw > zone.width:
        raise ValueError(
            f"pattern {pw}x{ph} does not fit zone {zone.width}x{zone.height}")
    if zone.x1 > width or zone.y1 > height:
        raise ValueError(f"zone for {zone.user_id!r} extends past the canvas")
    oy = zone.y0 + (zone.height - ph) // 2
    ox = zone.x0 + (zone.width - pw) // 2
    canvas = np.zeros((height, width), dtype=np.float64)
    canvas[oy:oy + ph, ox:ox + pw] = pattern
    return canvas


def multiplex_views(targets: list[tuple[AmplitudeImage, ViewingZone]],
                    iterations: int, seed: int,
                    width: int | None = None,
                    height: int | None = None) -> PhaseMap:
    """Encode several users' target patterns into one phase-only hologram.

    Each target is retrieved independently against a canvas that is dark
    outside the user's viewing zone; the unit-magnitude fields are summed
    and the phase of the sum re-imposes the phase-only constraint. Canvas
    dimensions default to the smallest power of two covering every zone.
    Per-user initial phases derive from (seed, user index), so adding a
    user never perturbs the others' retrievals.
    """
    if not targets:
        raise ValueError("at least one (target, zone) pair required")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    zones = [zone for _, zone in targets]
    check_disjoint(zones)
    if width is None:
        width = _next_pow2(max(z.x1 for z in zones))
    if height is None:
        height = _next_pow2(max(z.y1 for z in zones))
    _require_power_of_two(width, "canvas width")
    _require_power_of_two(height, "canvas height")
    total = np.zeros((height, width), dtype=np.complex128)
    for idx, (img, zone) in enumerate(targets):
        canvas = embed_in_zone(img.pixels, zone, width, height)
        rng = np.random.default_rng([seed, idx])
        phase, _, _ = _gs_loop(scaled_target(canvas), iterations, rng)
        total += unit_field(phase)
    return PhaseMap(wrapped_angle(total), seed=seed)


def crosstalk_matrix(recon: AmplitudeImage,
                     zones: list[ViewingZone]) -> np.ndarray:
    """Pairwise leakage between viewing zones, in dB.

    Entry (i, j) is the squared normalized correlation between the
    reconstructed patches of zones i and j: how much of zone j's pattern
    shows up in zone i, relative to the energy each zone holds on its own.
    The diagonal is 0 dB by construction; smaller zones are zero-padded to
    the largest patch before correlating. Correlations below the floor
    report -300 dB.
    """
    if not zones:
        raise ValueError("at least one viewing zone required")
    h, w = recon.shape
    for z in zones:
        if z.x1 > w or z.y1 > h:
            raise ValueError(f"zone for {z.user_id!r} extends past the image")
    check_disjoint(zones)
    patches = [recon.pixels[z.y0:z.y1, z.x0:z.x1] for z in zones]
    max_h = max(p.shape[0] for p in patches)
    max_w = max(p.shape[1] for p in patches)
    padded = [np.pad(p, ((0, max_h - p.shape[0]), (0, max_w - p.shape[1])))
              for p in patches]
    energies = [float(np.sum(p * p)) for p in padded]
    n = len(zones)
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            den = energies[i] * energies[j]
            num = float(np.sum(padded[i] * padded[j])) ** 2
            ratio = num / den if den > 0.0 else 0.0
            out[i, j] = 10.0 * np.log10(max(ratio, 1e-30))
    return out
