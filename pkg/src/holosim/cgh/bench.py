"""Wall-clock scaling benchmark for the retrieval loop.

Times full retrieval runs over a ladder of grid sizes and fits the
N*log2(N) model a single FFT-bound iteration predicts. Timings run on the
calling thread only; each point is the best of `repeats` runs to shed
scheduler noise.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .backend import available_backends, backend_name, get_backend
from .engine import _gs_loop, scaled_target

MIN_SIDE = 64
MAX_SIDE = 1024


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares coefficient of t = a * N * log2(N) and its R^2
    against the mean-only model."""

    coefficient: float
    r_squared: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[tuple[int, float], ...]
    iterations: int
    fit: ScalingFit
    backend: str

    def to_csv(self) -> str:
        lines = ["n_pixels,seconds,iterations"]
        for n_pixels, seconds in self.rows:
            lines.append(f"{n_pixels},{seconds:.9f},{self.iterations}")
        return "\n".join(lines) + "\n"


def _side_of(n_pixels: int) -> int:
    side = math.isqrt(n_pixels)
    if side * side != n_pixels or side < MIN_SIDE or side > MAX_SIDE or (side & (side - 1)):
        raise ValueError(
            f"size {n_pixels} is not a power-of-two square between "
            f"{MIN_SIDE}^2 and {MAX_SIDE}^2")
    return side


def fit_nlogn(rows: list[tuple[int, float]] | tuple[tuple[int, float], ...]) -> ScalingFit:
    """Fit t = a * N * log2(N) through the origin by least squares."""
    n = np.array([r[0] for r in rows], dtype=np.float64)
    t = np.array([r[1] for r in rows], dtype=np.float64)
    x = n * np.log2(n)
    a = float(np.dot(x, t) / np.dot(x, x))
    residual = t - a * x
    ss_res = float(np.dot(residual, residual))
    centered = t - float(np.mean(t))
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return ScalingFit(coefficient=a, r_squared=r_squared)


def _time_one(side: int, iterations: int, seed: int, repeats: int, kernels) -> float:
    target_rng = np.random.default_rng([seed, side])
    t_scaled = scaled_target(target_rng.random((side, side)))
    best = math.inf
    for attempt in range(repeats):
        rng = np.random.default_rng([seed, side, attempt])
        start = time.perf_counter()
        _gs_loop(t_scaled, iterations, rng, kernels=kernels)
        best = min(best, time.perf_counter() - start)
    return best


def benchmark_scaling(sizes: list[int], iterations: int, seed: int = 0,
                      repeats: int = 3, backend: str | None = None) -> BenchmarkReport:
    """Measure retrieval wall-clock time per pixel count and fit the
    N*log2(N) scaling model. Sizes are total pixel counts of square
    power-of-two grids (64^2 through 1024^2); iterations must be >= 10 so
    a run is long enough to time."""
    if iterations < 10:
        raise ValueError("iterations must be >= 10 for stable timing")
    if not sizes:
        raise ValueError("at least one size required")
    sides = [_side_of(n) for n in sizes]
    kernels = get_backend(backend) if backend else None
    name = backend if backend else backend_name()
    rows = []
    for n_pixels, side in zip(sizes, sides):
        rows.append((n_pixels, _time_one(side, iterations, seed, repeats, kernels)))
    return BenchmarkReport(rows=tuple(rows), iterations=iterations,
                           fit=fit_nlogn(rows), backend=name)


def compare_backends(n_pixels: int = 65536, iterations: int = 20, seed: int = 0,
                     repeats: int = 3) -> list[tuple[str, float]]:
    """Time the same retrieval run under every available kernel backend."""
    side = _side_of(n_pixels)
    results = []
    for name in available_backends():
        kernels = get_backend(name)
        results.append((name, _time_one(side, iterations, seed, repeats, kernels)))
    return results


def backends_csv(results: list[tuple[str, float]], n_pixels: int,
                 iterations: int) -> str:
    lines = ["backend,n_pixels,seconds,iterations"]
    for name, seconds in results:
        lines.append(f"{name},{n_pixels},{seconds:.9f},{iterations}")
    return "\n".join(lines) + "\n"
