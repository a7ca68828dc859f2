"""Kernel backend selection and cross-backend agreement."""
import os
import subprocess
import sys

import numpy as np
import pytest

import holosim.cgh as cgh
from holosim.cgh import backend as bk


def run_with_env(code: str, backend: str) -> str:
    env = dict(os.environ, HOLO_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env)
    assert out.returncode == 0, out.stderr
    return out.stdout.strip()


class TestSelection:
    def test_both_backends_importable(self):
        names = bk.available_backends()
        assert "python" in names
        assert "cython" in names  # built in this environment

    def test_env_var_forces_backend(self):
        code = "import holosim.cgh as c; print(c.backend_name())"
        assert run_with_env(code, "python") == "python"
        assert run_with_env(code, "cython") == "cython"
        assert run_with_env(code, "auto") in ("python", "cython")

    def test_bad_env_value_rejected(self):
        env = dict(os.environ, HOLO_BACKEND="fortran")
        out = subprocess.run(
            [sys.executable, "-c", "import holosim.cgh"],
            capture_output=True, text=True, env=env)
        assert out.returncode != 0

    def test_get_backend(self):
        py = bk.get_backend("python")
        assert py.BACKEND_NAME == "python"
        with pytest.raises(ValueError):
            bk.get_backend("fortran")


class TestKernelAgreement:
    """Both implementations compute the same three elementwise kernels."""

    def setup_method(self):
        self.py = bk.get_backend("python")
        self.cy = bk.get_backend("cython")
        rng = np.random.default_rng(5)
        self.phase = rng.uniform(0, 2 * np.pi, size=(32, 32))
        self.field = rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32))
        self.target = rng.random((32, 32)) + 0.1

    def test_unit_field_agrees(self):
        a = self.py.unit_field(self.phase)
        b = self.cy.unit_field(self.phase)
        assert np.max(np.abs(a - b)) < 1e-15
        assert np.allclose(np.abs(a), 1.0)

    def test_apply_target_agrees(self):
        fa = self.field.copy()
        fb = self.field.copy()
        ea = self.py.apply_target_and_error(fa, self.target)
        eb = self.cy.apply_target_and_error(fb, self.target)
        assert ea == pytest.approx(eb, rel=1e-12)
        assert np.max(np.abs(fa - fb)) < 1e-12
        assert np.allclose(np.hypot(fa.real, fa.imag), self.target)

    def test_apply_target_zero_modulus_bins(self):
        f = np.zeros((8, 8), dtype=np.complex128)
        t = np.full((8, 8), 2.0)
        for kern in (self.py, self.cy):
            fc = f.copy()
            err = kern.apply_target_and_error(fc, t)
            assert err == pytest.approx(8 * 8 * 4.0)
            assert np.array_equal(fc, t.astype(np.complex128))

    def test_wrapped_angle_agrees_and_stays_in_range(self):
        a = self.py.wrapped_angle(self.field)
        b = self.cy.wrapped_angle(self.field)
        assert np.max(np.abs(a - b)) < 1e-12
        for out in (a, b):
            assert np.all(out >= 0.0)
            assert np.all(out < 2 * np.pi)

    def test_wrapped_angle_edge_cases(self):
        edge = np.array([[1.0 + 0.0j, -1.0 + 0.0j],
                         [1.0 - 1e-300j, 0.0 + 0.0j]])
        for kern in (self.py, self.cy):
            out = kern.wrapped_angle(edge)
            assert np.all(out >= 0.0)
            assert np.all(out < 2 * np.pi)
            assert out[0, 0] == 0.0
            assert out[0, 1] == pytest.approx(np.pi)

    def test_full_retrieval_agrees_across_backends(self):
        code = (
            "import numpy as np, holosim.cgh as c\n"
            "t = c.AmplitudeImage(np.random.default_rng(9).random((32, 32)))\n"
            "r = c.gerchberg_saxton(t, iterations=15, seed=4)\n"
            "print(repr(r.final_nmse))\n")
        final_py = float(run_with_env(code, "python"))
        final_cy = float(run_with_env(code, "cython"))
        assert final_py == pytest.approx(final_cy, rel=1e-9)


class TestBenchmark:
    def test_fit_recovers_synthetic_nlogn(self):
        sizes = [4096, 16384, 65536]
        coeff = 3.25e-9
        rows = [(n, coeff * n * np.log2(n)) for n in sizes]
        fit = cgh.fit_nlogn(rows)
        assert fit.coefficient == pytest.approx(coeff, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_benchmark_report_shape_and_csv(self):
        rep = cgh.benchmark_scaling([4096, 16384], iterations=10, seed=0,
                                    repeats=1)
        assert [n for n, _ in rep.rows] == [4096, 16384]
        assert all(seconds > 0 for _, seconds in rep.rows)
        lines = rep.to_csv().strip().splitlines()
        assert lines[0] == "n_pixels,seconds,iterations"
        assert len(lines) == 3
        assert rep.backend in ("python", "cython")

    def test_non_square_or_tiny_sizes_rejected(self):
        with pytest.raises(ValueError):
            cgh.benchmark_scaling([4095], iterations=10)
        with pytest.raises(ValueError):
            cgh.benchmark_scaling([1024], iterations=10)  # side 32 < minimum
        with pytest.raises(ValueError):
            cgh.benchmark_scaling([4096], iterations=5)  # too few iterations

    def test_compare_backends_rows(self):
        rows = cgh.compare_backends(n_pixels=4096, iterations=10, repeats=1)
        assert sorted(name for name, _ in rows) == ["cython", "python"]
        csv = cgh.backends_csv(rows, n_pixels=4096, iterations=10)
        assert csv.splitlines()[0] == "backend,n_pixels,seconds,iterations"
        assert len(csv.strip().splitlines()) == 3
