"""Value types shared across the hologram synthesis engine."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

DEFAULT_WAVELENGTH_NM = 532.0
DEFAULT_PIXEL_PITCH_UM = 8.0


def _require_power_of_two(n: int, what: str) -> None:
    if n < 8 or (n & (n - 1)) != 0:
        raise ValueError(f"{what} must be a power of two >= 8, got {n}")


@dataclass(frozen=True)
class AmplitudeImage:
    """Non-negative target intensity pattern on a power-of-two grid."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2:
            raise ValueError("amplitude image must be 2-D")
        _require_power_of_two(px.shape[0], "image height")
        _require_power_of_two(px.shape[1], "image width")
        if np.any(px < 0):
            raise ValueError("amplitude values must be non-negative")
        object.__setattr__(self, "pixels", px)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape  # type: ignore[return-value]

    def energy(self) -> float:
        return float(np.sum(self.pixels ** 2))


@dataclass(frozen=True)
class PhaseMap:
    """Phase-only hologram: values in [0, 2*pi) plus optical metadata.

    Wavelength and pitch are carried for export only; the scalar transform
    model does not consume them.
    """

    phase: np.ndarray
    wavelength_nm: float = DEFAULT_WAVELENGTH_NM
    pixel_pitch_um: float = DEFAULT_PIXEL_PITCH_UM
    seed: int | None = None

    def __post_init__(self):
        ph = np.asarray(self.phase, dtype=np.float64)
        if ph.ndim != 2:
            raise ValueError("phase map must be 2-D")
        if np.any(ph < 0.0) or np.any(ph >= TWO_PI):
            raise ValueError("phase values must lie in [0, 2*pi)")
        if self.wavelength_nm <= 0 or self.pixel_pitch_um <= 0:
            raise ValueError("optical metadata must be positive")
        object.__setattr__(self, "phase", ph)

    @property
    def shape(self) -> tuple[int, int]:
        return self.phase.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class ComplexField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2:
            raise ValueError("field must be 2-D")
        if not np.all(np.isfinite(v)):
            raise ValueError("field entries must be finite")
        object.__setattr__(self, "values", v)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class ViewingZone:
    """Half-open pixel rectangle [x0, x1) x [y0, y1) in the reconstruction
    plane, owned by one user."""

    user_id: str
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (0 <= self.x0 < self.x1 and 0 <= self.y0 < self.y1):
            raise ValueError("zone bounds must satisfy 0 <= lo < hi")

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def overlaps(self, other: "ViewingZone") -> bool:
        return (self.x0 < other.x1 and other.x0 < self.x1
                and self.y0 < other.y1 and other.y0 < self.y1)


def check_disjoint(zones: list[ViewingZone] | tuple[ViewingZone, ...]) -> None:
    for i, a in enumerate(zones):
        for b in zones[i + 1:]:
            if a.overlaps(b):
                raise ValueError(
                    f"viewing zones for {a.user_id!r} and {b.user_id!r} overlap")


@dataclass(frozen=True)
class GsResult:
    """Output of one phase-retrieval run.

    error_history[k] is the NMSE measured at the far plane before the
    target constraint is applied on iteration k+1, so error_history[0] is
    the error of the random initial phase. final_nmse is the error of the
    returned phase itself (one extra propagation after the loop), which is
    what its reconstruction actually achieves.
    """

    phase_map: PhaseMap
    error_history: tuple[float, ...]
    final_nmse: float
    iterations_run: int
    seed: int

    def __post_init__(self):
        if self.iterations_run < 1:
            raise ValueError("iterations_run must be >= 1")
        if len(self.error_history) != self.iterations_run:
            raise ValueError("error history length must equal iterations_run")
        if any(e < 0 for e in self.error_history) or self.final_nmse < 0:
            raise ValueError("NMSE values must be non-negative")
