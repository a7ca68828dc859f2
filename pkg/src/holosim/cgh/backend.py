"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; the numpy
fallback is always available. HOLO_BACKEND=python|cython|auto overrides
the choice at import time (cython raises if the extension is missing).
"""
from __future__ import annotations

import os

from . import _kernels_py


def _load():
    choice = os.environ.get("HOLO_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "python", "cython"):
        raise ValueError(f"HOLO_BACKEND must be auto, python, or cython, not {choice!r}")
    if choice == "python":
        return _kernels_py
    try:
        from . import _kernels_cy  # type: ignore[attr-defined]
        return _kernels_cy
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "HOLO_BACKEND=cython but the compiled extension is not built")
        return _kernels_py


_impl = _load()

unit_field = _impl.unit_field
apply_target_and_error = _impl.apply_target_and_error
wrapped_angle = _impl.wrapped_angle


def backend_name() -> str:
    return _impl.BACKEND_NAME


def get_backend(name: str):
    """Return a specific kernel module by name, independent of the env
    selection. Used by the backend comparison benchmark and tests."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels_cy  # type: ignore[attr-defined]
        return _kernels_cy
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels_cy  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names
