import numpy as np
import pytest

from sketchsolve.errors import (
    DimensionError,
    NotPositiveDefiniteError,
    RankDeficientError,
)
from sketchsolve.linalg import (
    RngStream,
    cholesky_solve,
    direct_lstsq,
    qr_thin,
    sym_eigvals,
)


class TestQrThin:
    def test_identity(self):
        q, r = qr_thin(np.eye(3))
        assert np.allclose(q, np.eye(3))
        assert np.allclose(r, np.eye(3))

    def test_hand_gram_schmidt(self):
        # columns e1 and e1+e2 orthogonalize to e1, e2 with R = [[1,1],[0,1]]
        a = np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
        q, r = qr_thin(a)
        assert np.allclose(q, np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
        assert np.allclose(r, np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_reconstruction_oracle(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((64, 8))
        q, r = qr_thin(a)
        assert np.linalg.norm(q.T @ q - np.eye(8)) < 1e-12
        assert np.linalg.norm(q @ r - a) / np.linalg.norm(a) < 1e-12

    def test_reconstruction_large(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((512, 128))
        q, r = qr_thin(a)
        assert np.linalg.norm(q @ r - a) / np.linalg.norm(a) < 1e-10
        assert np.linalg.norm(q.T @ q - np.eye(128)) < 1e-10

    def test_nonnegative_diagonal(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            _, r = qr_thin(rng.standard_normal((20, 6)))
            assert np.all(np.diagonal(r) >= 0)

    def test_rank_deficient(self):
        a = np.ones((10, 3))
        with pytest.raises(RankDeficientError):
            qr_thin(a)

    def test_wide_rejected(self):
        with pytest.raises(DimensionError):
            qr_thin(np.ones((2, 5)))


class TestCholeskySolve:
    def test_identity(self):
        g = np.array([1.0, -2.0, 3.0, 0.5])
        assert np.allclose(cholesky_solve(np.eye(4), g), g)

    def test_scalar(self):
        assert np.allclose(cholesky_solve([[4.0]], [2.0]), [0.5])

    def test_construct_and_check(self):
        rng = np.random.default_rng(3)
        d = 12
        low = np.tril(rng.standard_normal((d, d)), k=-1)
        np.fill_diagonal(low, rng.uniform(1.0, 2.0, d))
        m = low @ low.T
        g = rng.standard_normal(d)
        y = cholesky_solve(m, g)
        assert np.linalg.norm(m @ y - g) / np.linalg.norm(g) < 1e-10

    def test_not_positive_definite(self):
        m = np.diag([1.0, -1.0])
        with pytest.raises(NotPositiveDefiniteError):
            cholesky_solve(m, [1.0, 1.0])

    def test_asymmetric_rejected(self):
        m = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(DimensionError):
            cholesky_solve(m, [1.0, 1.0])


class TestSymEigvals:
    def test_diagonal(self):
        assert np.allclose(sym_eigvals(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_identity(self):
        assert np.allclose(sym_eigvals(np.eye(5)), np.ones(5))

    def test_planted_spectrum(self):
        rng = np.random.default_rng(4)
        q, _ = qr_thin(rng.standard_normal((3, 3)))
        m = q @ np.diag([0.5, 1.0, 4.0]) @ q.T
        assert np.allclose(sym_eigvals(m), [0.5, 1.0, 4.0], atol=1e-9)


class TestDirectLstsq:
    def test_identity(self):
        b = np.array([2.0, -1.0, 0.5])
        assert np.allclose(direct_lstsq(np.eye(3), b), b)

    def test_consistent_system(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((40, 7))
        x0 = rng.standard_normal(7)
        x = direct_lstsq(a, a @ x0)
        assert np.linalg.norm(x - x0) < 1e-10

    def test_normal_equation_oracle(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal((128, 16))
        b = rng.standard_normal(128)
        x = direct_lstsq(a, b)
        atb = a.T @ b
        assert np.linalg.norm(a.T @ (a @ x) - atb) < 1e-9 * np.linalg.norm(atb)

    def test_agrees_with_normal_equations(self):
        rng = np.random.default_rng(7)
        a = rng.standard_normal((100, 10))
        b = rng.standard_normal(100)
        x_qr = direct_lstsq(a, b)
        x_ne = cholesky_solve(a.T @ a, a.T @ b)
        assert np.linalg.norm(x_qr - x_ne) / np.linalg.norm(x_qr) < 1e-8


class TestRngStream:
    def test_same_seed_same_sequence(self):
        a = RngStream(42).gen.standard_normal(1000)
        b = RngStream(42).gen.standard_normal(1000)
        assert np.array_equal(a, b)

    def test_substreams_differ(self):
        base = RngStream(42)
        a = base.substream(1).gen.standard_normal(10_000)
        b = base.substream(2).gen.standard_normal(10_000)
        assert not np.array_equal(a, b)

    def test_substream_deterministic(self):
        a = RngStream(7).substream(3).gen.standard_normal(100)
        b = RngStream(7).substream(3).gen.standard_normal(100)
        assert np.array_equal(a, b)

    def test_nested_substreams_distinct(self):
        base = RngStream(9)
        seen = set()
        for i in range(50):
            seen.add(base.substream(i).stream)
        assert len(seen) == 50
