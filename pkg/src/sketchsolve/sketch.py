"""Random subspace embeddings: Gaussian, Haar, and the SRHT.

The subsampled randomized Hadamard transform implemented here is the
permuted variant S = B H D P / sqrt(n): a uniform row permutation P, a
diagonal of independent signs D, the (unnormalized) Walsh-Hadamard
transform H, and a Bernoulli(m/n) row-sampling mask B whose zero rows are
discarded.  The realized row count m_tilde is therefore Binomial(n, m/n).
Applying the operator costs O(n d log n) flops via the in-place butterfly
plus an O(m_tilde d) gather; the mask is never materialized as a matrix.

Operators are immutable after sampling and safe to share across threads;
``apply`` is a pure function.  Sampling requires exclusive access to its
RngStream.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, NotPowerOfTwoError, TooLargeError
from .linalg import RngStream, as_matrix, qr_thin

DENSE_LIMIT = 4096
_SRHT_RESAMPLE_LIMIT = 8


class SketchKind(str, Enum):
    GAUSSIAN = "gaussian"
    HAAR = "haar"
    SRHT = "srht"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht_inplace(v: np.ndarray) -> np.ndarray:
    """In-place unnormalized Walsh-Hadamard transform of a length-2^p vector.

    Uses the butterfly recursion H_1 = [1], H_n = [[H, H], [H, -H]], so
    applying it twice multiplies by n.  Returns the mutated input.
    """
    if not isinstance(v, np.ndarray) or v.ndim != 1:
        raise DimensionError("fwht_inplace: expected a 1-D numpy array")
    n = v.shape[0]
    if not _is_power_of_two(n):
        raise NotPowerOfTwoError(f"fwht_inplace: length {n} is not a power of two")
    h = 1
    while h < n:
        x = v.reshape(n // (2 * h), 2, h)
        t = x[:, 0, :] - x[:, 1, :]
        x[:, 0, :] += x[:, 1, :]
        x[:, 1, :] = t
        h *= 2
    return v


def _fwht_columns(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform applied down each column, in place."""
    n = a.shape[0]
    h = 1
    while h < n:
        x = a.reshape(n // (2 * h), 2, h, -1)
        t = x[:, 0] - x[:, 1]
        x[:, 0] += x[:, 1]
        x[:, 1] = t
        h *= 2
    return a


@dataclass(frozen=True)
class SketchOperator:
    """A sampled m x n random embedding.

    For Gaussian and Haar kinds ``matrix`` holds the explicit m x n
    operator.  For the SRHT the payload is the sign vector, the
    permutation, and the keep mask; ``m_tilde`` is the realized row count
    (equals ``m`` for the other kinds).
    """

    kind: SketchKind
    n: int
    m: int
    seed: int
    stream: int
    matrix: np.ndarray | None = None
    signs: np.ndarray | None = None
    perm: np.ndarray | None = None
    keep: np.ndarray | None = None

    @property
    def m_tilde(self) -> int:
        if self.kind is SketchKind.SRHT:
            return int(np.count_nonzero(self.keep))
        return self.m


def sample(kind: SketchKind, m: int, n: int, rng: RngStream) -> SketchOperator:
    """Draw a fresh sketch operator, consuming draws from ``rng``.

    Gaussian entries are i.i.d. N(0, 1/m).  Haar rows are the transposed Q
    factor of an n x m standard Gaussian matrix (nonnegative-diagonal sign
    convention, hence uniform over row spaces).  SRHT draws signs,
    permutation, and a Bernoulli(m/n) keep mask; an all-zero mask is
    redrawn up to 8 times before failing.

    Identical stream state (same seed/stream key and position) reproduces
    an identical operator.
    """
    kind = SketchKind(kind)
    if not (0 < m <= n):
        raise DimensionError(f"sample: need 0 < m <= n, got m={m}, n={n}")
    seed, stream = rng.seed, rng.stream
    if kind is SketchKind.GAUSSIAN:
        mat = rng.gen.standard_normal((m, n)) / np.sqrt(m)
        return SketchOperator(kind, n, m, seed, stream, matrix=mat)
    if kind is SketchKind.HAAR:
        g = rng.gen.standard_normal((n, m))
        q, _ = qr_thin(g)
        return SketchOperator(kind, n, m, seed, stream, matrix=np.ascontiguousarray(q.T))
    if not _is_power_of_two(n):
        raise NotPowerOfTwoError(f"sample: SRHT needs n a power of two, got {n}")
    for _ in range(_SRHT_RESAMPLE_LIMIT):
        signs = np.where(rng.gen.random(n) < 0.5, -1.0, 1.0)
        perm = rng.gen.permutation(n)
        keep = rng.gen.random(n) < (m / n)
        if keep.any():
            return SketchOperator(kind, n, m, seed, stream, signs=signs, perm=perm, keep=keep)
    raise DimensionError(
        f"sample: SRHT keep mask empty after {_SRHT_RESAMPLE_LIMIT} redraws (m/n = {m/n:.2e})"
    )


def apply(op: SketchOperator, a) -> np.ndarray:
    """Compute S A for an n x d matrix A (d may be 1 via a vector).

    The SRHT path works column-wise: permute rows, multiply signs, run the
    Walsh-Hadamard butterfly, scale by 1/sqrt(n), gather the kept rows.
    Gaussian and Haar apply as dense multiplies.
    """
    vec_in = np.asarray(a).ndim == 1
    mat = as_matrix(np.asarray(a).reshape(-1, 1) if vec_in else a, "a")
    if mat.shape[0] != op.n:
        raise DimensionError(f"apply: operator expects {op.n} rows, got {mat.shape[0]}")
    if op.kind is SketchKind.SRHT:
        work = mat[op.perm] * op.signs[:, None]
        _fwht_columns(work)
        work /= np.sqrt(op.n)
        out = work[op.keep]
    else:
        out = op.matrix @ mat
    return out.ravel() if vec_in else out


def _hadamard_matrix(n: int) -> np.ndarray:
    h = np.array([[1.0]])
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def dense(op: SketchOperator) -> np.ndarray:
    """Materialize the operator as an explicit m_tilde x n (or m x n) matrix.

    This is the test oracle: the SRHT path multiplies an explicitly built
    Hadamard matrix rather than reusing the butterfly, so it checks the
    fast path against an independent construction.
    """
    if op.n > DENSE_LIMIT:
        raise TooLargeError(f"dense: refusing to materialize n = {op.n} > {DENSE_LIMIT}")
    if op.kind is not SketchKind.SRHT:
        return op.matrix.copy()
    p = np.eye(op.n)[op.perm]
    s = _hadamard_matrix(op.n) @ (op.signs[:, None] * p) / np.sqrt(op.n)
    return s[op.keep]
