"""Closed-form spectral theory for sketched Gram matrices.

Everything here is parameterized by two aspect ratios of the limiting
regime: ``col_ratio`` (columns over ambient rows, the limit of d/n) and
``sketch_ratio`` (sketch rows over ambient rows, the limit of m/n), with
0 < col_ratio < sketch_ratio <= 1.  The object of study is the d x d Gram
matrix U^T S^T S U of a sketched orthonormal frame U, whose limiting
spectral law determines the error-optimal step size and the per-iteration
error contraction of the sketched Newton iteration:

* For Gaussian embeddings the law is Marchenko-Pastur with shape
  parameter col_ratio/sketch_ratio, and the contraction equals that shape.
* For orthogonal embeddings (Haar and SRHT share one limit) the law has
  an explicit Stieltjes transform; its first two inverse moments have the
  closed forms implemented in :func:`orthogonal_rates`, and the
  contraction is strictly smaller than the Gaussian one whenever
  sketch_ratio < 1.

The Stieltjes transform of the zero-padded law (the n x n matrix with the
same nonzero spectrum) is a root of

    z^2 (1 - z) m^2 - z (z + g + s - 2) m + (1 - g)(1 - s) = 0

with g = col_ratio, s = sketch_ratio; the physical root maps the upper
half-plane to itself and is positive on the negative real axis.  When
col_ratio + sketch_ratio > 1 the Gram law additionally carries a point
mass at 1 (the sketch range necessarily intersects the frame's column
space); the moment helpers account for it analytically.

All functions are pure and thread-safe.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import BadRatiosError, DimensionError, InvalidZError, PoleInputError

DENSITY_EPS = 1e-6
OVERLAY_EPS = 1e-4
SUPPORT_CUTOFF = 10.0


def validate_ratios(col_ratio: float, sketch_ratio: float, open_top: bool = False) -> None:
    """Check 0 < col_ratio < sketch_ratio <= 1 (strictly < 1 when open_top)."""
    if not (0.0 < col_ratio < sketch_ratio <= 1.0):
        raise BadRatiosError(
            f"need 0 < col_ratio < sketch_ratio <= 1, got ({col_ratio}, {sketch_ratio})"
        )
    if open_top and sketch_ratio >= 1.0:
        raise BadRatiosError("this operation needs sketch_ratio < 1")


@dataclass(frozen=True)
class SketchRates:
    """Optimal-step data for refreshed-sketch iterations at one ratio pair.

    inv_moment1/inv_moment2 are the limits of the normalized traces of the
    first and second inverse moments of the sketched Gram matrix;
    step_size = inv_moment1/inv_moment2 minimizes the expected one-step
    error and rate = 1 - inv_moment1^2/inv_moment2 is the resulting
    contraction of E||error||^2.  gaussian_rate is the d/m limit, the
    contraction a Gaussian embedding of the same size achieves.
    """

    inv_moment1: float
    inv_moment2: float
    step_size: float
    gaussian_rate: float
    rate: float


def orthogonal_rates(col_ratio: float, sketch_ratio: float) -> SketchRates:
    """Closed forms for Haar/SRHT embeddings.

    inv_moment1 = (1-g)/(s-g) and
    inv_moment2 = (1-g)(g^2 + s - 2gs)/(s-g)^3, whence the contraction
    1 - inv_moment1^2/inv_moment2 simplifies to
    gaussian_rate * s(1-s)/(g^2 + s - 2gs); both routes are computed and
    agree to rounding.  At sketch_ratio = 1 the step is exactly 1 and the
    rate is 0: a full orthogonal sketch solves in one step.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s)
    inv1 = (1.0 - g) / (s - g)
    inv2 = (1.0 - g) * (g * g + s - 2.0 * g * s) / (s - g) ** 3
    gaussian_rate = g / s
    rate = gaussian_rate * s * (1.0 - s) / (g * g + s - 2.0 * s * g)
    return SketchRates(inv1, inv2, inv1 / inv2, gaussian_rate, rate)


def gaussian_rates(col_ratio: float, sketch_ratio: float) -> SketchRates:
    """Closed forms for Gaussian embeddings via Marchenko-Pastur moments.

    With shape r = col_ratio/sketch_ratio, the inverse moments of the
    Marchenko-Pastur law are 1/(1-r) and 1/(1-r)^3 (checked against
    quadrature in the test suite), so the optimal step is (1-r)^2 and the
    contraction equals r itself.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s)
    r = g / s
    inv1 = 1.0 / (1.0 - r)
    inv2 = 1.0 / (1.0 - r) ** 3
    return SketchRates(inv1, inv2, (1.0 - r) ** 2, r, r)


def mp_support(shape: float) -> tuple[float, float]:
    """Support edges ((1-sqrt(shape))^2, (1+sqrt(shape))^2) of Marchenko-Pastur."""
    if not (0.0 < shape < 1.0):
        raise BadRatiosError(f"shape must be in (0,1), got {shape}")
    root = math.sqrt(shape)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_density(x: float, shape: float) -> float:
    """Marchenko-Pastur density sqrt((b-x)+(x-a)+)/(2 pi shape x); 0 off [a, b]."""
    a, b = mp_support(shape)
    x = float(x)
    if x <= a or x >= b:
        return 0.0
    return math.sqrt((b - x) * (x - a)) / (2.0 * math.pi * shape * x)


def mp_cdf(shape: float, grid_points: int = 4000):
    """Numerically integrated Marchenko-Pastur CDF as a callable."""
    a, b = mp_support(shape)
    xs = np.linspace(a, b, grid_points)
    dens = np.array([mp_density(x, shape) for x in xs])
    cum = integrate.cumulative_trapezoid(dens, xs, initial=0.0)
    cum /= cum[-1]

    def cdf(x):
        return np.clip(np.interp(x, xs, cum, left=0.0, right=1.0), 0.0, 1.0)

    return cdf


def _stieltjes_roots(z: complex, g: float, s: float) -> tuple[complex, complex]:
    """Both roots of the padded-law quadratic, computed cancellation-free."""
    a = z * z * (1.0 - z)
    b = -z * (z + g + s - 2.0)
    c = (1.0 - g) * (1.0 - s)
    disc = cmath.sqrt(b * b - 4.0 * a * c)
    if (b.conjugate() * disc).real < 0.0:
        disc = -disc
    q = -0.5 * (b + disc)
    if abs(a) < 1e-300:                       # z at 0 or 1: equation is linear
        root = -c / b
        return root, root
    if abs(q) < 1e-300:
        return 0.0 + 0.0j, b / a * (-1.0)
    return q / a, c / q


def _padded_transform(z: complex, g: float, s: float) -> complex:
    """Physical Stieltjes transform of the zero-padded law at z off [0, inf)."""
    r1, r2 = _stieltjes_roots(z, g, s)
    if z.imag != 0.0:
        want_pos = z.imag > 0.0
        m1, m2 = (r1.imag > 0.0) == want_pos, (r2.imag > 0.0) == want_pos
        if m1 and m2:
            # off-support ties: the physical branch carries the point-mass
            # pole at 0, hence the larger |imag|
            return r1 if abs(r1.imag) >= abs(r2.imag) else r2
        return r1 if m1 else r2
    # real z < 0: both roots real; the physical one dominates (its residue
    # at 0 is the larger point mass)
    return complex(max(r1.real, r2.real))


def stieltjes(z: complex, col_ratio: float, sketch_ratio: float) -> tuple[complex, complex]:
    """Stieltjes transforms (padded law, Gram law) at z.

    The padded law is the spectrum of the n x n zero-extension of the
    sketched Gram matrix (point mass 1 - col_ratio at zero); the Gram law
    is the d x d spectrum itself.  They differ by the exact pole
    relation gram = padded/col_ratio + (1 - col_ratio)/(col_ratio z).

    z must lie off the closed positive real axis and off {0, 1}.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s, open_top=True)
    z = complex(z)
    if z == 0.0 or z == 1.0 or (z.imag == 0.0 and z.real >= 0.0):
        raise InvalidZError(f"z = {z} is outside the transform's domain")
    padded = _padded_transform(z, g, s)
    gram = padded / g + (1.0 - g) / (g * z)
    return padded, gram


def eta_transform(z: float, col_ratio: float, sketch_ratio: float) -> float:
    """Eta transform of the padded law at real z > 0: (1/z) m(-1/z)."""
    if not z > 0.0:
        raise InvalidZError(f"eta transform needs z > 0, got {z}")
    padded, _ = stieltjes(-1.0 / z, col_ratio, sketch_ratio)
    return padded.real / z


def eta_fixed_point_residual(z: float, col_ratio: float, sketch_ratio: float) -> float:
    """Defect of the eta transform in its own second-order fixed point.

    The padded law's eta transform must satisfy
    eta = (1 - g) + g / (1 + z (1 + (s - 1)/eta)); the returned value is
    the absolute mismatch, which is rounding-level for the closed form.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    e = eta_transform(z, g, s)
    rhs = (1.0 - g) + g / (1.0 + z * (1.0 + (s - 1.0) / e))
    return abs(e - rhs)


def unit_atom_mass(col_ratio: float, sketch_ratio: float) -> float:
    """Mass of the Gram law's point mass at 1: max(0, (g + s - 1)/g).

    When col_ratio + sketch_ratio > 1 the sketch range must intersect the
    frame's column space in dimension at least d + m - n, pinning that
    fraction of the eigenvalues at exactly 1.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s)
    return max(0.0, (g + s - 1.0) / g)


def orthogonal_density(x: float, col_ratio: float, sketch_ratio: float,
                       eps: float = DENSITY_EPS) -> float:
    """Smoothed density of the Gram law at x > 0: Im gram(x + i eps) / pi.

    The smoothing parameter trades bias (order eps) against ringing at the
    support edges; 1e-6 suits quadrature, 1e-4 suits plot overlays.  Any
    point mass at 1 shows up as a Lorentzian spike of width eps.
    """
    if not (x > 0.0):
        raise InvalidZError(f"density needs x > 0, got {x}")
    if not (0.0 < eps <= 1e-3):
        raise InvalidZError(f"eps must be in (0, 1e-3], got {eps}")
    _, gram = stieltjes(complex(x, eps), col_ratio, sketch_ratio)
    return max(gram.imag / math.pi, 0.0)


def support_lower_bound(col_ratio: float, sketch_ratio: float) -> float:
    """Lower edge bound (1 - sqrt(g/s))^2 / (1 + 1/sqrt(s))^2 for the Gram law."""
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s)
    return (1.0 - math.sqrt(g / s)) ** 2 / (1.0 + 1.0 / math.sqrt(s)) ** 2


def orthogonal_density_moment(power: int, col_ratio: float, sketch_ratio: float,
                              eps: float = DENSITY_EPS) -> float:
    """Integral of x^-power against the Gram law, by adaptive quadrature.

    Integrates the smoothed continuous part (the point mass at 1, if any,
    is removed from the transform and re-added analytically so the
    quadrature never has to resolve an eps-wide spike).  power = 0 gives
    the total mass, 1 and 2 the inverse moments matched by
    :func:`orthogonal_rates`.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s, open_top=True)
    atom = unit_atom_mass(g, s)

    def continuous_part(x: float) -> float:
        z = complex(x, eps)
        _, gram = stieltjes(z, g, s)
        if atom > 0.0:
            gram -= atom / (1.0 - z)
        return max(gram.imag / math.pi, 0.0) / x ** power

    lo = support_lower_bound(g, s) / 2.0
    val, _ = integrate.quad(continuous_part, lo, SUPPORT_CUTOFF, limit=400)
    return val + atom


def orthogonal_cdf(col_ratio: float, sketch_ratio: float, rescaled: bool = True,
                   eps: float = OVERLAY_EPS, grid_points: int = 2000):
    """Numerically integrated CDF of the Gram law as a callable.

    With rescaled=True the variable is an eigenvalue of the
    (n/m)-rescaled Gram matrix (the convention used for density overlays
    and KS comparisons); any point mass enters as an exact step.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s, open_top=True)
    atom = unit_atom_mass(g, s)
    scale = s if rescaled else 1.0
    _, hi = mp_support(g / s)
    xs = np.linspace(1e-9, (hi if rescaled else hi * s) * 1.25, grid_points)

    def smooth(y: float) -> float:
        z = complex(scale * y, eps)
        _, gram = stieltjes(z, g, s)
        if atom > 0.0:
            gram -= atom / (1.0 - z)
        return max(gram.imag / math.pi, 0.0) * scale

    dens = np.array([smooth(x) for x in xs])
    cum = integrate.cumulative_trapezoid(dens, xs, initial=0.0)
    atom_at = 1.0 / s if rescaled else 1.0

    def cdf(x):
        base = np.interp(x, xs, cum, left=0.0, right=cum[-1])
        return np.clip(base + atom * (np.asarray(x, dtype=float) >= atom_at), 0.0, 1.0)

    return cdf


def bernoulli_s_transform(y: float, p: float) -> float:
    """S-transform (y+1)/(y+p) of the Bernoulli(p) spectral law p d1 + (1-p) d0."""
    if abs(y + p) < 1e-300:
        raise PoleInputError(f"y = {y} is a pole for p = {p}")
    return (y + 1.0) / (y + p)


def free_product_residual(y: float, col_ratio: float, sketch_ratio: float) -> float:
    """Defect of the closed form in the free-multiplication identity.

    The padded law is the free multiplicative convolution of two Bernoulli
    projector laws, so its S-transform is the product
    (y+1)^2 / ((y+g)(y+s)).  Equivalently its eta transform satisfies
    eta(-y(y+1)/((y+g)(y+s))) = y + 1.  Writing
    z = -(y+g)(y+s)/(y(y+1)), that means z * m(-z) = y + 1 on the branch
    of the quadratic that continues the identity; the returned residual is
    min over both roots of |z m(-z) - (y+1)| and is rounding-level when
    the closed form is correct.  Some y land exactly on a support edge,
    where root extraction loses half the digits; the defect is therefore
    also measured directly in the defining quadratic (scale-normalized)
    and the smaller of the two is returned.
    """
    g, s = float(col_ratio), float(sketch_ratio)
    validate_ratios(g, s)
    for pole in (0.0, -1.0, -g, -s):
        if abs(y - pole) < 1e-12:
            raise PoleInputError(f"y = {y} hits a pole of the identity")
    z = -(y + g) * (y + s) / (y * (y + 1.0))
    target = y + 1.0
    r1, r2 = _stieltjes_roots(complex(-z), g, s)
    via_roots = min(abs(z * r1 - target), abs(z * r2 - target))
    w = complex(-z)
    a = w * w * (1.0 - w)
    b = -w * (w + g + s - 2.0)
    c = (1.0 - g) * (1.0 - s)
    m_hat = target / z
    terms = (a * m_hat * m_hat, b * m_hat, c)
    scale = max(sum(abs(t) for t in terms), 1e-300)
    via_quadratic = abs(sum(terms)) / scale
    return min(via_roots, via_quadratic)


@dataclass(frozen=True)
class CostModel:
    """Leading-order operation counts (unit constants) for the two solvers."""

    ihs_ops: float
    pcg_ops: float
    ratio: float


def cost_model(n: int, d: int, eps: float) -> CostModel:
    """Operation-count model: refreshed-sketch iteration vs preconditioned CG.

    The refreshed solver pays sketching + factoring + stepping on every
    iteration: (nd log d + d^3 + nd) log(1/eps).  Preconditioned CG pays
    sketching and factoring once at sketch size ~ d log d, then nd per
    iteration: nd log d + d^3 log d + nd log(1/eps).  With n/d and eps
    fixed and d growing, the ratio scales like 1/log d.
    """
    if not (n >= d >= 2):
        raise DimensionError(f"cost_model: need n >= d >= 2, got n={n}, d={d}")
    if not (0.0 < eps < 1.0):
        raise DimensionError(f"cost_model: eps must be in (0,1), got {eps}")
    logd = math.log(d)
    accuracy = math.log(1.0 / eps)
    ihs = (n * d * logd + d**3 + n * d) * accuracy
    pcg = n * d * logd + d**3 * logd + n * d * accuracy
    return CostModel(ihs, pcg, ihs / pcg)
