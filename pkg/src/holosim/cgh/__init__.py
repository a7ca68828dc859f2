"""Hologram synthesis: phase retrieval, steering, multiplexing, and I/O."""
from .backend import available_backends, backend_name
from .bench import (
    BenchmarkReport,
    ScalingFit,
    backends_csv,
    benchmark_scaling,
    compare_backends,
    fit_nlogn,
)
from .engine import (
    crosstalk_matrix,
    embed_in_zone,
    fft2_unitary,
    gerchberg_saxton,
    ifft2_unitary,
    multiplex_views,
    phase_ramp,
    reconstruct,
)
from .pgm import (
    load_amplitude,
    load_phase_map,
    read_pgm,
    save_amplitude,
    save_phase_map,
    write_pgm,
)
from .types import (
    DEFAULT_PIXEL_PITCH_UM,
    DEFAULT_WAVELENGTH_NM,
    AmplitudeImage,
    ComplexField,
    GsResult,
    PhaseMap,
    ViewingZone,
    check_disjoint,
)

__all__ = [
    "DEFAULT_PIXEL_PITCH_UM",
    "DEFAULT_WAVELENGTH_NM",
    "AmplitudeImage",
    "BenchmarkReport",
    "ComplexField",
    "GsResult",
    "PhaseMap",
    "ScalingFit",
    "ViewingZone",
    "available_backends",
    "backend_name",
    "backends_csv",
    "benchmark_scaling",
    "check_disjoint",
    "compare_backends",
    "crosstalk_matrix",
    "embed_in_zone",
    "fft2_unitary",
    "fit_nlogn",
    "gerchberg_saxton",
    "ifft2_unitary",
    "load_amplitude",
    "load_phase_map",
    "multiplex_views",
    "phase_ramp",
    "read_pgm",
    "reconstruct",
    "save_amplitude",
    "save_phase_map",
    "write_pgm",
]
