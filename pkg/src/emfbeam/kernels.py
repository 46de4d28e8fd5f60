"""Numeric hot kernels: near-field channel rows and power scans.

Two interchangeable backends. The numba one (default when importable) JIT
compiles the inner loops; the pure-numpy one is selected by setting the
environment variable ``EMFBEAM_NUMBA`` to ``0``/``false``/``off`` before
import, or automatically when numba is missing. Both produce the same
values to machine precision; ``benchmarks/bench_kernels.py`` compares their
throughput.
"""

import math
import os

import numpy as np

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


def _numba_enabled() -> bool:
    flag = os.environ.get("EMFBEAM_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


def _rows_numpy(elements, points):
    d = np.hypot(
        points[:, 0, None] - elements[None, :, 0],
        points[:, 1, None] - elements[None, :, 1],
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.exp(TWO_PI * 1j * d) / (FOUR_PI * d)


def _powers_numpy(rows, b, chi):
    y = rows @ b
    return (y.real * y.real + y.imag * y.imag) * chi


_rows_numba = None
_powers_numba = None

if _numba_enabled():
    try:
        from numba import njit, prange

        @njit(parallel=True, cache=True, error_model="numpy")
        def _rows_jit(elements, points, out):  # pragma: no cover - jitted
            for i in prange(points.shape[0]):
                for m in range(elements.shape[0]):
                    dx = points[i, 0] - elements[m, 0]
                    dy = points[i, 1] - elements[m, 1]
                    d = math.sqrt(dx * dx + dy * dy)
                    amp = 1.0 / (FOUR_PI * d)
                    ph = TWO_PI * d
                    out[i, m] = complex(amp * math.cos(ph), amp * math.sin(ph))

        # no prange here: the per-call parallel launch overhead exceeds the
        # work for circle-sized scans
        @njit(cache=True, error_model="numpy")
        def _powers_jit(rows, b, chi, out):  # pragma: no cover - jitted
            for i in range(rows.shape[0]):
                acc_re = 0.0
                acc_im = 0.0
                for m in range(rows.shape[1]):
                    r = rows[i, m]
                    acc_re += r.real * b[m].real - r.imag * b[m].imag
                    acc_im += r.real * b[m].imag + r.imag * b[m].real
                out[i] = (acc_re * acc_re + acc_im * acc_im) * chi

        def _rows_numba(elements, points):
            out = np.empty((points.shape[0], elements.shape[0]), dtype=np.complex128)
            _rows_jit(
                np.ascontiguousarray(elements, dtype=np.float64),
                np.ascontiguousarray(points, dtype=np.float64),
                out,
            )
            return out

        def _powers_numba(rows, b, chi):
            out = np.empty(rows.shape[0], dtype=np.float64)
            _powers_jit(
                np.ascontiguousarray(rows),
                np.ascontiguousarray(b, dtype=np.complex128),
                float(chi),
                out,
            )
            return out

    except ImportError:
        pass

if _rows_numba is not None:
    BACKEND = "numba"
    _ROWS, _POWERS = _rows_numba, _powers_numba
else:
    BACKEND = "numpy"
    _ROWS, _POWERS = _rows_numpy, _powers_numpy


def nearfield_rows(elements, points):
    """Spherical-wave channel rows for a batch of probe points.

    elements: (M, 2) positions in wavelengths; points: (S, 2). Returns an
    (S, M) complex matrix with entries e^(j*2pi*d) / (4pi*d), d the
    element-to-point distance. A point coinciding with an element yields
    non-finite entries (singular 1/d); callers decide how to treat those.
    """
    return _ROWS(np.asarray(elements, dtype=np.float64), np.asarray(points, dtype=np.float64))


def scan_powers(rows, b, chi):
    """Received power |rows @ b|^2 * chi per point, fixed summation order."""
    return _POWERS(rows, np.asarray(b, dtype=np.complex128), float(chi))
