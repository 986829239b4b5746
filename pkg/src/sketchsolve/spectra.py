"""Empirical spectra of sketched Gram matrices versus the limiting laws.

Each trial draws a fresh orthonormal frame U (thin QR of a Gaussian
matrix) and a fresh sketch S, and collects the eigenvalues of
U^T S^T S U.  Pooled over trials, the rescaled spectrum (multiplied by
n/m) is compared with the Marchenko-Pastur law of shape d/m and with the
orthogonal-embedding law via Kolmogorov-Smirnov distances, and the
unrescaled inverse moments estimate the closed forms of
:func:`sketchsolve.theory.orthogonal_rates`.

Trials are independent and run on a thread pool (capped by
SKETCHSOLVE_THREADS); the report assembly is a deterministic, ordered
reduction, so identical seeds give identical reports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EmptySamplesError
from .linalg import RngStream, qr_thin, sym_eigvals
from .sketch import SketchKind, apply, sample
from .theory import mp_cdf, orthogonal_cdf
from ._util import parallel_map


@dataclass
class SpectralReport:
    """Pooled spectrum of (n/m) U^T S^T S U plus comparisons to theory.

    ``eigenvalues`` holds the rescaled pooled eigenvalues, sorted.  The
    inverse-moment estimates are taken on the unrescaled matrix.  The
    histogram is a density over 60 (by default) uniform bins.
    """

    kind: SketchKind
    n: int
    d: int
    m: int
    trials: int
    seed: int
    eigenvalues: np.ndarray
    hist_edges: np.ndarray
    hist_density: np.ndarray
    inv_moment1_hat: float
    inv_moment2_hat: float
    ks_to_mp: float
    ks_to_orthogonal_theory: float


def _trial_eigenvalues(kind: SketchKind, n: int, d: int, m: int, rng: RngStream) -> np.ndarray:
    u, _ = qr_thin(rng.gen.standard_normal((n, d)))
    op = sample(kind, m, n, rng)
    su = apply(op, u)
    return sym_eigvals(su.T @ su)


def _pooled_eigenvalues(kind, n, d, m, trials, rng) -> np.ndarray:
    if not (0 < d < m <= n):
        raise DimensionError(f"need d < m <= n, got d={d}, m={m}, n={n}")
    if trials < 1:
        raise DimensionError("trials must be >= 1")
    kind = SketchKind(kind)
    eigs = parallel_map(
        lambda i: _trial_eigenvalues(kind, n, d, m, rng.substream(i)),
        range(trials),
    )
    return np.concatenate(eigs)


def inverse_moment_estimates(kind, n: int, d: int, m: int, trials: int,
                             rng: RngStream) -> tuple[float, float]:
    """Monte-Carlo estimates of the first two inverse moments of U^T S^T S U."""
    if (m - d) / n < 0.05:
        warnings.warn(
            "sketch_ratio - col_ratio < 0.05: inverse moments are ill-conditioned",
            stacklevel=2,
        )
    lam = _pooled_eigenvalues(kind, n, d, m, trials, rng)
    return float(np.mean(1.0 / lam)), float(np.mean(1.0 / lam**2))


def empirical_spectrum(kind, n: int, d: int, m: int, trials: int,
                       bins: int = 60, rng: RngStream | None = None,
                       seed: int = 0) -> SpectralReport:
    """Sample, pool, and compare the spectrum of the rescaled sketched Gram."""
    if rng is None:
        rng = RngStream(seed)
    kind = SketchKind(kind)
    lam = _pooled_eigenvalues(kind, n, d, m, trials, rng)
    inv1 = float(np.mean(1.0 / lam))
    inv2 = float(np.mean(1.0 / lam**2))
    rescaled = np.sort(lam * (n / m))
    edges = np.linspace(0.0, 1.05 * rescaled[-1], bins + 1)
    density, _ = np.histogram(rescaled, bins=edges, density=True)
    if m == n:
        # full orthogonal sketch: the limiting law is a point mass at 1
        orth_cdf = lambda x: (np.asarray(x, dtype=float) >= 1.0).astype(float)
    else:
        orth_cdf = orthogonal_cdf(d / n, m / n)
    report = SpectralReport(
        kind=kind, n=n, d=d, m=m, trials=trials, seed=rng.seed,
        eigenvalues=rescaled, hist_edges=edges, hist_density=density,
        inv_moment1_hat=inv1, inv_moment2_hat=inv2,
        ks_to_mp=ks_distance(rescaled, mp_cdf(d / m)),
        ks_to_orthogonal_theory=ks_distance(rescaled, orth_cdf),
    )
    return report


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between sorted samples and a CDF callable.

    Handles ties and discontinuous reference CDFs: the supremum is taken
    over both one-sided limits at each distinct sample value, so a point
    mass compared against its own step CDF scores (near) zero.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise EmptySamplesError("ks_distance: empty sample")
    if np.any(np.diff(x) < 0.0):
        raise DimensionError("ks_distance: samples must be sorted ascending")
    vals, counts = np.unique(x, return_counts=True)
    ecdf_hi = np.cumsum(counts) / x.size
    ecdf_lo = ecdf_hi - counts / x.size
    f_hi = np.asarray(cdf(vals), dtype=np.float64)
    f_lo = np.asarray(cdf(np.nextafter(vals, -np.inf)), dtype=np.float64)
    return float(max(np.max(np.abs(ecdf_hi - f_hi)), np.max(np.abs(ecdf_lo - f_lo))))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance (both samples sorted or not)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptySamplesError("ks_two_sample: empty sample")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
