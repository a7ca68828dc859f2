# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementwise hologram kernels.

Same contract as _kernels_py; fuses the per-pixel loops so each array is
traversed once without numpy temporaries.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, cos, sin, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

cdef double TWO_PI = 6.283185307179586476925287


def unit_field(cnp.ndarray[cnp.float64_t, ndim=2] phase):
    """exp(i*phase) as complex128."""
    cdef Py_ssize_t h = phase.shape[0], w = phase.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((h, w), dtype=np.complex128)
    cdef Py_ssize_t i, j
    cdef double p
    for i in range(h):
        for j in range(w):
            p = phase[i, j]
            out[i, j] = cos(p) + 1j * sin(p)
    return out


def apply_target_and_error(cnp.ndarray[cnp.complex128_t, ndim=2] freq,
                           cnp.ndarray[cnp.float64_t, ndim=2] target):
    """Replace |freq| with target in place, keeping phase, and return the
    raw squared modulus error sum((|freq| - target)**2) measured first.

    Zero-modulus bins take the target magnitude at phase 0.
    """
    cdef Py_ssize_t h = freq.shape[0], w = freq.shape[1]
    cdef Py_ssize_t i, j
    cdef double re, im, mag, t, d, err = 0.0
    for i in range(h):
        for j in range(w):
            re = freq[i, j].real
            im = freq[i, j].imag
            mag = sqrt(re * re + im * im)
            t = target[i, j]
            d = mag - t
            err += d * d
            if mag == 0.0:
                freq[i, j] = t + 0.0j
            else:
                freq[i, j] = (t / mag) * freq[i, j]
    return err


def wrapped_angle(cnp.ndarray[cnp.complex128_t, ndim=2] field):
    """Phase of a complex field wrapped to [0, 2*pi)."""
    cdef Py_ssize_t h = field.shape[0], w = field.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((h, w), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double p
    for i in range(h):
        for j in range(w):
            p = atan2(field[i, j].imag, field[i, j].real)
            if p < 0.0:
                p += TWO_PI
            if p >= TWO_PI:
                p = 0.0
            out[i, j] = p
    return out
