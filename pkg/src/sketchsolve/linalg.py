"""Dense linear-algebra kernels and a seedable, splittable random stream.

All kernels operate on float64 ``numpy.ndarray`` values and are pure
functions; matrices are never mutated.  LAPACK (via numpy/scipy) provides
the factorizations: Householder QR, Cholesky, and the symmetric
eigensolver.  The random stream wraps the counter-based Philox generator
so that reproducibility and substream independence are part of the
contract, not an accident of global state.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import (
    DimensionError,
    NoConvergenceError,
    NotPositiveDefiniteError,
    RankDeficientError,
)

RANK_TOL = 1e-12
SYM_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name}: expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name}: entries must be finite")
    return m


def as_vector(v, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and return ``v`` as a 1-D float64 array, optionally of fixed length."""
    x = np.asarray(v, dtype=np.float64).ravel()
    if length is not None and x.shape[0] != length:
        raise DimensionError(f"{name}: expected length {length}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DimensionError(f"{name}: entries must be finite")
    return x


def _check_symmetric(m: np.ndarray, name: str) -> np.ndarray:
    scale = np.linalg.norm(m, ord="fro")
    if scale > 0 and np.linalg.norm(m - m.T, ord="fro") > SYM_TOL * scale * 100:
        raise DimensionError(f"{name}: matrix is not symmetric")
    return 0.5 * (m + m.T)


def qr_thin(a) -> tuple[np.ndarray, np.ndarray]:
    """Thin Householder QR of an n x d matrix, n >= d, with nonnegative R diagonal.

    Returns (Q, R) with Q of shape (n, d) having orthonormal columns and R
    upper-triangular with R[i, i] >= 0.  The sign convention makes the map
    Gaussian -> Q produce the uniform (Haar) distribution over orthonormal
    frames, which the sketch module relies on.

    Raises RankDeficientError if any |R[i, i]| <= RANK_TOL * |R[0, 0]|.
    """
    m = as_matrix(a, "a")
    n, d = m.shape
    if n < d:
        raise DimensionError(f"qr_thin: need rows >= cols, got {n} x {d}")
    q, r = np.linalg.qr(m, mode="reduced")
    diag = np.diagonal(r).copy()
    lead = abs(diag[0])
    if lead == 0.0 or np.any(np.abs(diag) <= RANK_TOL * lead):
        raise RankDeficientError(
            f"qr_thin: rank-deficient input (min |R_ii| = {np.min(np.abs(diag)):.3e})"
        )
    signs = np.where(diag < 0.0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


class CholeskyFactor:
    """Cached Cholesky factorization of a symmetric positive-definite matrix."""

    def __init__(self, factor):
        self._factor = factor

    def solve(self, g) -> np.ndarray:
        return cho_solve(self._factor, np.asarray(g, dtype=np.float64))


def cholesky_factor(m) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix once for repeated solves."""
    sym = _check_symmetric(as_matrix(m, "m"), "cholesky_factor")
    try:
        return CholeskyFactor(cho_factor(sym, lower=True, check_finite=False))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def cholesky_solve(m, g) -> np.ndarray:
    """Solve M y = g for symmetric positive-definite M."""
    mm = as_matrix(m, "m")
    return cholesky_factor(mm).solve(as_vector(g, mm.shape[0], "g"))


def sym_eigvals(m) -> np.ndarray:
    """Eigenvalues of the symmetrized matrix (M + M^T)/2, sorted ascending."""
    sym = _check_symmetric(as_matrix(m, "m"), "sym_eigvals")
    try:
        return np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc


def direct_lstsq(a, b) -> np.ndarray:
    """Minimize ||A x - b||^2 by thin QR; the exact reference solver.

    Built on qr_thin so rank deficiency raises RankDeficientError.
    """
    m = as_matrix(a, "a")
    rhs = as_vector(b, m.shape[0], "b")
    q, r = qr_thin(m)
    return solve_triangular(r, q.T @ rhs, lower=False, check_finite=False)


def _splitmix64(x: int) -> int:
    """SplitMix64 finalizer; the documented substream-derivation hash."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class RngStream:
    """Seedable random stream over the Philox counter-based generator.

    A stream is identified by the 128-bit key ``(seed, stream)``; identical
    keys reproduce identical draw sequences.  Independent substreams come
    from :meth:`substream`, which mixes the parent stream id and a child
    index through SplitMix64 so that derivations nest without collisions in
    practice.

    Streams are single-owner mutable state: share the derived substreams
    across workers, never a live stream.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream = int(stream) & 0xFFFFFFFFFFFFFFFF
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "RngStream":
        """Derive the ``index``-th independent child stream."""
        child = _splitmix64(self.stream ^ _splitmix64((int(index) + 1) & 0xFFFFFFFFFFFFFFFF))
        return RngStream(self.seed, child)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, stream={self.stream})"
