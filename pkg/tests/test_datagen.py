import numpy as np
import pytest

from sketchsolve.datagen import (
    generate_problem,
    load_matrix,
    load_vector,
    save_matrix,
    save_vector,
)
from sketchsolve.errors import DimensionError
from sketchsolve.linalg import sym_eigvals


class TestGenerateProblem:
    def test_condition_number(self):
        d = 200
        prob = generate_problem(512, d, 0.98, 0)
        s = np.linalg.svd(prob.a, compute_uv=False)
        expect = 0.98 ** (-(d - 1))
        assert s[0] / s[-1] == pytest.approx(expect, rel=1e-8)
        assert expect == pytest.approx(55.7, abs=0.1)

    def test_planted_spectrum(self):
        n, d, decay = 256, 32, 0.9
        prob = generate_problem(n, d, decay, 1)
        eigs = sym_eigvals(prob.a.T @ prob.a)
        expect = np.sort(decay ** (2.0 * np.arange(1, d + 1)))
        assert np.allclose(eigs, expect, rtol=1e-9)

    def test_deterministic(self):
        p1 = generate_problem(64, 8, 0.98, 7)
        p2 = generate_problem(64, 8, 0.98, 7)
        assert np.array_equal(p1.a, p2.a)
        assert np.array_equal(p1.b, p2.b)

    def test_seeds_differ(self):
        p1 = generate_problem(64, 8, 0.98, 7)
        p2 = generate_problem(64, 8, 0.98, 8)
        assert not np.array_equal(p1.a, p2.a)

    def test_rhs_off_column_space(self):
        # the noise term keeps b from being exactly consistent
        prob = generate_problem(128, 16, 0.98, 2)
        x = np.linalg.lstsq(prob.a, prob.b, rcond=None)[0]
        assert np.linalg.norm(prob.a @ x - prob.b) > 1e-6

    def test_validation(self):
        with pytest.raises(DimensionError):
            generate_problem(8, 16, 0.98, 0)
        with pytest.raises(DimensionError):
            generate_problem(16, 8, 1.5, 0)


class TestMatrixFiles:
    @pytest.mark.parametrize("fmt", ["csv", "binary"])
    def test_round_trip_exact(self, fmt, tmp_path):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((17, 5))
        path = tmp_path / f"mat.{fmt}"
        save_matrix(path, m, fmt=fmt)
        assert np.array_equal(load_matrix(path), m)

    @pytest.mark.parametrize("fmt", ["csv", "binary"])
    def test_vector_round_trip(self, fmt, tmp_path):
        v = np.random.default_rng(4).standard_normal(23)
        path = tmp_path / f"vec.{fmt}"
        save_vector(path, v, fmt=fmt)
        assert np.array_equal(load_vector(path), v)

    def test_binary_layout(self, tmp_path):
        m = np.array([[1.5, -2.0], [0.0, 3.25]])
        path = tmp_path / "mat.bin"
        save_matrix(path, m, fmt="binary")
        raw = path.read_bytes()
        assert raw[:8] == b"DMATRX01"
        assert int.from_bytes(raw[8:16], "little") == 2
        assert int.from_bytes(raw[16:24], "little") == 2
        assert np.frombuffer(raw[24:], dtype="<f8").tolist() == [1.5, -2.0, 0.0, 3.25]

    def test_truncated_binary_rejected(self, tmp_path):
        path = tmp_path / "mat.bin"
        save_matrix(path, np.ones((4, 4)), fmt="binary")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DimensionError):
            load_matrix(path)

    def test_padded_binary_rejected(self, tmp_path):
        path = tmp_path / "mat.bin"
        save_matrix(path, np.ones((4, 4)), fmt="binary")
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(DimensionError):
            load_matrix(path)

    def test_load_vector_rejects_matrix(self, tmp_path):
        path = tmp_path / "mat.csv"
        save_matrix(path, np.ones((3, 3)))
        with pytest.raises(DimensionError):
            load_vector(path)

    def test_csv_is_plain_text(self, tmp_path):
        path = tmp_path / "mat.csv"
        save_matrix(path, np.array([[1.0, 2.0]]))
        assert path.read_text().strip() == "1,2"
