import os
import subprocess
import sys

import numpy as np
import pytest

from emfbeam import kernels


def sample_inputs(n_points=500, m=16, seed=0):
    rng = np.random.default_rng(seed)
    elements = np.stack([np.arange(m) * 0.5, np.zeros(m)], axis=1)
    points = rng.uniform(-300, 300, size=(n_points, 2))
    b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return elements, points, b / np.linalg.norm(b)


def test_backends_agree_on_rows():
    elements, points, _ = sample_inputs()
    ref = kernels._rows_numpy(elements, points)
    if kernels._rows_numba is None:
        pytest.skip("numba backend not available")
    out = kernels._rows_numba(elements, points)
    assert np.abs(out - ref).max() < 1e-14


def test_backends_agree_on_powers():
    elements, points, b = sample_inputs(seed=1)
    rows = np.ascontiguousarray(kernels._rows_numpy(elements, points))
    ref = kernels._powers_numpy(rows, b, 0.7)
    if kernels._powers_numba is None:
        pytest.skip("numba backend not available")
    out = kernels._powers_numba(rows, b, 0.7)
    assert np.abs(out - ref).max() <= 1e-12 * ref.max()


def test_rows_deterministic():
    elements, points, _ = sample_inputs(seed=2)
    a = kernels.nearfield_rows(elements, points)
    b = kernels.nearfield_rows(elements, points)
    assert a.tobytes() == b.tobytes()


def test_singular_point_is_nonfinite():
    elements = np.array([[0.0, 0.0], [0.5, 0.0]])
    rows = kernels.nearfield_rows(elements, np.array([[0.0, 0.0]]))
    assert not np.isfinite(rows[0, 0])
    assert np.isfinite(rows[0, 1])


def test_scan_powers_matches_direct_product():
    elements, points, b = sample_inputs(seed=3)
    rows = kernels.nearfield_rows(elements, points)
    expect = np.abs(rows @ b) ** 2 * 0.3
    assert np.allclose(kernels.scan_powers(rows, b, 0.3), expect, rtol=1e-12)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, EMFBEAM_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "from emfbeam import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "numpy"


def test_default_backend_reported():
    assert kernels.BACKEND in ("numba", "numpy")
