import numpy as np
import pytest
from scipy.linalg import hadamard as scipy_hadamard

from sketchsolve.errors import DimensionError, NotPowerOfTwoError, TooLargeError
from sketchsolve.linalg import RngStream, qr_thin, sym_eigvals
from sketchsolve.sketch import (
    SketchKind,
    SketchOperator,
    apply,
    dense,
    fwht_inplace,
    sample,
)
from sketchsolve.spectra import ks_two_sample


class TestFwht:
    def test_first_column(self):
        assert np.array_equal(fwht_inplace(np.array([1.0, 0.0, 0.0, 0.0])),
                              np.ones(4))

    def test_h2_by_hand(self):
        assert np.array_equal(fwht_inplace(np.array([1.0, -1.0])), [0.0, 2.0])

    def test_involution_up_to_n(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(64)
        out = fwht_inplace(fwht_inplace(v.copy()))
        assert np.linalg.norm(out - 64 * v) < 1e-12 * np.linalg.norm(v) * 64

    def test_matches_scipy_hadamard(self):
        rng = np.random.default_rng(1)
        for n in (1, 2, 4, 8, 16, 32, 64):
            v = rng.standard_normal(n)
            assert np.allclose(fwht_inplace(v.copy()), scipy_hadamard(n) @ v,
                               atol=1e-12)

    def test_not_power_of_two(self):
        with pytest.raises(NotPowerOfTwoError):
            fwht_inplace(np.zeros(12))


def _srht_oracle_matrix(op: SketchOperator) -> np.ndarray:
    """Independent SRHT construction from the recorded payload via scipy."""
    n = op.n
    p = np.eye(n)[op.perm]
    return (scipy_hadamard(n) @ np.diag(op.signs) @ p / np.sqrt(n))[op.keep]


class TestSample:
    def test_haar_full_square_orthogonal(self):
        op = sample(SketchKind.HAAR, 16, 16, RngStream(0))
        s = op.matrix
        assert np.linalg.norm(s @ s.T - np.eye(16)) < 1e-10
        assert np.linalg.norm(s.T @ s - np.eye(16)) < 1e-10

    def test_haar_rows_orthonormal(self):
        op = sample(SketchKind.HAAR, 10, 40, RngStream(1))
        assert np.linalg.norm(op.matrix @ op.matrix.T - np.eye(10)) < 1e-10

    def test_srht_all_kept_at_full_size(self):
        op = sample(SketchKind.SRHT, 32, 32, RngStream(2))
        assert op.m_tilde == 32

    def test_srht_dense_construction_oracle(self):
        op = sample(SketchKind.SRHT, 4, 8, RngStream(3))
        assert np.allclose(dense(op), _srht_oracle_matrix(op), atol=1e-12)

    def test_gaussian_entry_variance(self):
        # mn >= 1e5 draws: empirical variance within 5% of 1/m
        op = sample(SketchKind.GAUSSIAN, 200, 512, RngStream(4))
        var = np.var(op.matrix)
        assert abs(var - 1.0 / 200) < 0.05 / 200

    def test_determinism(self):
        a = np.random.default_rng(9).standard_normal((64, 5))
        for kind in SketchKind:
            op1 = sample(kind, 16, 64, RngStream(77))
            op2 = sample(kind, 16, 64, RngStream(77))
            assert np.array_equal(apply(op1, a), apply(op2, a))

    def test_bad_dimensions(self):
        with pytest.raises(DimensionError):
            sample(SketchKind.GAUSSIAN, 0, 8, RngStream(0))
        with pytest.raises(DimensionError):
            sample(SketchKind.HAAR, 9, 8, RngStream(0))

    def test_srht_needs_power_of_two(self):
        with pytest.raises(NotPowerOfTwoError):
            sample(SketchKind.SRHT, 4, 12, RngStream(0))


class TestApply:
    def test_zero_matrix(self):
        for kind in SketchKind:
            op = sample(kind, 8, 32, RngStream(5))
            assert np.allclose(apply(op, np.zeros((32, 3))), 0.0)

    def test_degenerate_randomness(self):
        # identity permutation, +1 signs, keep everything: rows of H A / sqrt(n)
        n = 16
        op = SketchOperator(SketchKind.SRHT, n, n, 0, 0,
                            signs=np.ones(n), perm=np.arange(n),
                            keep=np.ones(n, dtype=bool))
        a = np.random.default_rng(6).standard_normal((n, 4))
        expected = scipy_hadamard(n) @ a / np.sqrt(n)
        assert np.allclose(apply(op, a), expected, atol=1e-12)

    def test_dense_oracle_all_kinds(self):
        a = np.random.default_rng(7).standard_normal((64, 8))
        for kind in SketchKind:
            op = sample(kind, 24, 64, RngStream(8))
            assert np.allclose(apply(op, a), dense(op) @ a, atol=1e-12)

    def test_vector_input(self):
        op = sample(SketchKind.SRHT, 8, 32, RngStream(9))
        v = np.random.default_rng(10).standard_normal(32)
        assert np.allclose(apply(op, v), dense(op) @ v, atol=1e-12)

    def test_dimension_mismatch(self):
        op = sample(SketchKind.GAUSSIAN, 4, 16, RngStream(11))
        with pytest.raises(DimensionError):
            apply(op, np.ones((8, 2)))


class TestDense:
    def test_haar_orthonormal_rows(self):
        op = sample(SketchKind.HAAR, 12, 48, RngStream(12))
        s = dense(op)
        assert np.linalg.norm(s @ s.T - np.eye(12)) < 1e-10

    def test_srht_unit_row_norms(self):
        op = sample(SketchKind.SRHT, 16, 64, RngStream(13))
        s = dense(op)
        assert np.allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-12)

    def test_srht_orthonormal_rows(self):
        op = sample(SketchKind.SRHT, 64, 256, RngStream(14))
        s = dense(op)
        assert np.linalg.norm(s @ s.T - np.eye(op.m_tilde)) < 1e-10

    def test_srht_orthonormal_rows_1024(self):
        op = sample(SketchKind.SRHT, 256, 1024, RngStream(15))
        s = dense(op)
        assert np.linalg.norm(s @ s.T - np.eye(op.m_tilde)) < 1e-10

    def test_too_large(self):
        op = sample(SketchKind.SRHT, 16, 8192, RngStream(16))
        with pytest.raises(TooLargeError):
            dense(op)


class TestStatisticalInvariants:
    def test_gaussian_gram_approaches_identity(self):
        # (1/trials) sum S^T S over 200 trials at n=256, m=64
        n, m, trials = 256, 64, 200
        rng = RngStream(17)
        acc = np.zeros((n, n))
        for i in range(trials):
            op = sample(SketchKind.GAUSSIAN, m, n, rng.substream(i))
            acc += op.matrix.T @ op.matrix
        acc /= trials
        off = acc - np.diag(np.diagonal(acc))
        assert np.max(np.abs(off)) < 0.05
        assert np.max(np.abs(np.diagonal(acc) - 1.0)) < 0.2

    def test_srht_row_count_binomial_mean(self):
        n, m, trials = 1024, 512, 1000
        rng = RngStream(18)
        counts = [sample(SketchKind.SRHT, m, n, rng.substream(i)).m_tilde
                  for i in range(trials)]
        sigma = np.sqrt(n * (m / n) * (1 - m / n))
        assert abs(np.mean(counts) - m) < 3 * sigma / np.sqrt(trials)

    def test_bisigned_permuted_hadamard_equal_distribution(self):
        # pooled spectra of U^T (P^T D H) B (H D P) U and
        # U^T (P^T D H D P) B (P^T D H D P) U agree over 50 seeds
        n, d, m, seeds = 512, 64, 160, 50
        eig_direct, eig_conjugated = [], []
        for s in range(seeds):
            rng = RngStream(1000 + s)
            u, _ = qr_thin(rng.substream(0).gen.standard_normal((n, d)))
            op = sample(SketchKind.SRHT, m, n, rng)
            su = apply(op, u)
            eig_direct.append(sym_eigvals(su.T @ su))

            inv_perm = np.argsort(op.perm)
            w = u[op.perm] * op.signs[:, None]
            h = 1
            while h < n:
                x = w.reshape(n // (2 * h), 2, h, -1)
                t = x[:, 0] - x[:, 1]
                x[:, 0] += x[:, 1]
                x[:, 1] = t
                h *= 2
            w = (op.signs[:, None] * w / np.sqrt(n))[inv_perm]
            wb = w[op.keep]
            eig_conjugated.append(sym_eigvals(wb.T @ wb))
        d_ks = ks_two_sample(np.concatenate(eig_direct), np.concatenate(eig_conjugated))
        assert d_ks < 0.08
