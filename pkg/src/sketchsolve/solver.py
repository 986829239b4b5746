"""Least-squares solvers: sketched Newton iteration, CG, preconditioned CG.

The central routine is :func:`ihs_solve`, the refreshed-sketch Newton
iteration

    x_{t+1} = x_t - mu_t H_t^{-1} grad f(x_t) + beta_t (x_t - x_{t-1}),

where f(x) = ||Ax - b||^2 / 2 and H_t = (S_t A)^T (S_t A) is the Hessian
estimated through a fresh random embedding S_t.  With the optimal step
sizes from :mod:`sketchsolve.theory` and zero momentum, the expected
squared error contracts by the embedding's closed-form rate at every
iteration.

A solve is single-threaded and owns its random stream; run independent
trials in parallel by deriving one substream per trial.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionError,
    InitRequiresXStarError,
    NotPositiveDefiniteError,
)
from .linalg import RngStream, as_matrix, as_vector, cholesky_factor, qr_thin
from .sketch import SketchKind, SketchOperator, apply, sample
from .theory import gaussian_rates, orthogonal_rates


@dataclass(frozen=True)
class Problem:
    """A dense overdetermined least-squares instance min ||a x - b||^2."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        if a.shape[0] < a.shape[1]:
            raise DimensionError(f"Problem: need n >= d, got {a.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", as_vector(self.b, a.shape[0], "b"))

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape


@dataclass(frozen=True)
class StepSchedule:
    """Step-size/momentum schedule for the sketched Newton iteration.

    Modes: "optimal-haar" uses the orthogonal-embedding closed form with
    the finite-sample ratios d/n and m/n plugged in; "optimal-gaussian"
    uses (1 - d/m)^2; "custom" takes explicit per-iteration lists (the
    last entry repeats past the end).
    """

    mode: str = "optimal-haar"
    step_sizes: tuple[float, ...] | None = None
    momenta: tuple[float, ...] | None = None

    MODES = ("optimal-haar", "optimal-gaussian", "custom")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "custom":
            if not self.step_sizes:
                raise ValueError("custom schedule needs a non-empty step-size list")
            if any(mu < 0.0 for mu in self.step_sizes):
                raise ValueError("custom step sizes must be nonnegative")

    @classmethod
    def optimal_haar(cls) -> "StepSchedule":
        return cls(mode="optimal-haar")

    @classmethod
    def optimal_gaussian(cls) -> "StepSchedule":
        return cls(mode="optimal-gaussian")

    @classmethod
    def custom(cls, step_sizes, momenta=None) -> "StepSchedule":
        return cls(mode="custom", step_sizes=tuple(step_sizes),
                   momenta=None if momenta is None else tuple(momenta))

    def coefficients(self, n: int, d: int, m: int, t: int) -> tuple[float, float]:
        """(step size, momentum) for iteration t at finite sizes (n, d, m)."""
        if self.mode == "optimal-haar":
            return orthogonal_rates(d / n, m / n).step_size, 0.0
        if self.mode == "optimal-gaussian":
            return gaussian_rates(d / n, m / n).step_size, 0.0
        mu = self.step_sizes[min(t, len(self.step_sizes) - 1)]
        beta = 0.0
        if self.momenta:
            beta = self.momenta[min(t, len(self.momenta) - 1)]
        return mu, beta


@dataclass(frozen=True)
class IhsConfig:
    """Configuration of one sketched-Newton solve.

    refresh_period: 1 resamples the embedding every iteration, k every k
    iterations, 0 keeps the first embedding for the whole run.  init
    "zero" starts at the origin; "isotropic-delta" starts at
    x* + R^{-1} delta with delta uniform on the unit sphere (R the thin-QR
    factor of a), so the initial error vector is exactly unit-norm and
    isotropic in the column-space basis; it requires x_star.
    """

    kind: SketchKind
    m: int
    max_iters: int = 20
    refresh_period: int = 1
    seed: int = 0
    init: str = "zero"

    def __post_init__(self):
        object.__setattr__(self, "kind", SketchKind(self.kind))
        if self.refresh_period < 0:
            raise DimensionError("refresh_period must be >= 0")
        if self.init not in ("zero", "isotropic-delta"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class SolveTrace:
    """Per-iteration record of a solve.

    ``errors[t]`` is ||a (x_t - x*)||^2 when the exact solution was
    supplied and the normal-equation residual ||a^T (a x_t - b)|| when it
    was not; the array always includes t = 0, so its length is one more
    than the number of iterations run.
    """

    errors: np.ndarray
    error_kind: str
    x_final: np.ndarray
    cum_seconds: np.ndarray
    phase_seconds: dict[str, float]
    converged: bool | None = None
    operators: list[SketchOperator] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.errors) - 1


def iterations_to(trace: SolveTrace, rel_tol: float) -> int | None:
    """First iteration whose error drops to rel_tol of the initial one."""
    e0 = trace.errors[0]
    if e0 == 0.0:
        return 0
    hits = np.nonzero(trace.errors <= rel_tol * e0)[0]
    return int(hits[0]) if hits.size else None


def _error_fn(problem: Problem, x_star):
    if x_star is not None:
        xs = as_vector(x_star, problem.shape[1], "x_star")

        def err(x):
            r = problem.a @ (x - xs)
            return float(r @ r)

        return err, "sq_error"

    atb = problem.a.T @ problem.b

    def err(x):
        g = problem.a.T @ (problem.a @ x) - atb
        return float(np.linalg.norm(g))

    return err, "residual"


def ihs_solve(problem: Problem, cfg: IhsConfig, schedule: StepSchedule,
              x_star=None, record_operators: bool = False) -> SolveTrace:
    """Run the sketched Newton iteration.

    At every refresh step a fresh embedding is drawn from an independent
    substream of the config seed, S_t a is formed through the sketch
    module, and the d x d Gram matrix is Cholesky-factored once; the
    factor is reused until the next refresh.  A singular Gram matrix
    (possible when an unlucky SRHT draw keeps fewer than d rows) is
    resampled once, then raises NotPositiveDefiniteError.
    """
    a, b = problem.a, problem.b
    n, d = a.shape
    if cfg.m < d:
        raise DimensionError(f"ihs_solve: sketch size m={cfg.m} below d={d}")
    rng = RngStream(cfg.seed)

    if cfg.init == "isotropic-delta":
        if x_star is None:
            raise InitRequiresXStarError("isotropic-delta initialization needs x_star")
        delta = rng.substream(0).gen.standard_normal(d)
        delta /= np.linalg.norm(delta)
        _, r = qr_thin(a)
        x = as_vector(x_star, d) + solve_triangular(r, delta, lower=False, check_finite=False)
    else:
        x = np.zeros(d)

    err, error_kind = _error_fn(problem, x_star)
    errors = [err(x)]
    cum = [0.0]
    phases = {"sketch": 0.0, "factor": 0.0, "iterate": 0.0}
    ops: list[SketchOperator] = []

    factor = None
    refresh_count = 0
    x_prev = x
    start = time.perf_counter()
    for t in range(cfg.max_iters):
        refresh = t == 0 or (cfg.refresh_period >= 1 and t % cfg.refresh_period == 0)
        if refresh:
            sk_rng = rng.substream(1 + refresh_count)
            refresh_count += 1
            for attempt in (0, 1):
                t0 = time.perf_counter()
                op = sample(cfg.kind, cfg.m, n, sk_rng)
                sa = apply(op, a)
                t1 = time.perf_counter()
                phases["sketch"] += t1 - t0
                try:
                    factor = cholesky_factor(sa.T @ sa)
                    phases["factor"] += time.perf_counter() - t1
                    break
                except NotPositiveDefiniteError:
                    phases["factor"] += time.perf_counter() - t1
                    if attempt == 1:
                        raise
            if record_operators:
                ops.append(op)
        t2 = time.perf_counter()
        mu, beta = schedule.coefficients(n, d, cfg.m, t)
        grad = a.T @ (a @ x) - a.T @ b
        x_new = x - mu * factor.solve(grad)
        if beta != 0.0:
            x_new = x_new + beta * (x - x_prev)
        x_prev, x = x, x_new
        phases["iterate"] += time.perf_counter() - t2
        errors.append(err(x))
        cum.append(time.perf_counter() - start)

    return SolveTrace(np.array(errors), error_kind, x, np.array(cum), phases,
                      operators=ops)


def cg_solve(problem: Problem, max_iters: int = 1000, tol: float = 1e-12,
             x_star=None) -> SolveTrace:
    """Conjugate gradient on the normal equations a^T a x = a^T b.

    a^T a is never formed; each iteration costs two matrix-vector
    products.  Stops when the normal-equation residual falls to ``tol``
    relative to ||a^T b|| or after max_iters; non-convergence is reported
    through ``converged``, never raised.
    """
    a, b = problem.a, problem.b
    d = a.shape[1]
    err, error_kind = _error_fn(problem, x_star)

    x = np.zeros(d)
    atb = a.T @ b
    ref = float(np.linalg.norm(atb))
    r = atb.copy()
    p = r.copy()
    rs = float(r @ r)
    errors = [err(x)]
    cum = [0.0]
    converged = math.sqrt(rs) <= tol * ref
    start = time.perf_counter()
    it = 0
    while it < max_iters and not converged:
        atap = a.T @ (a @ p)
        alpha = rs / float(p @ atap)
        x = x + alpha * p
        r = r - alpha * atap
        rs_new = float(r @ r)
        it += 1
        errors.append(err(x))
        cum.append(time.perf_counter() - start)
        if math.sqrt(rs_new) <= tol * ref:
            converged = True
            break
        p = r + (rs_new / rs) * p
        rs = rs_new

    total = time.perf_counter() - start
    return SolveTrace(np.array(errors), error_kind, x, np.array(cum),
                      {"sketch": 0.0, "factor": 0.0, "iterate": total},
                      converged=converged)


def default_pcg_sketch_size(d: int) -> int:
    """The usual preconditioning sketch size, d log d (natural log)."""
    return max(d + 1, math.ceil(d * math.log(max(d, 2))))


def pcg_solve(problem: Problem, m: int | None = None,
              kind: SketchKind = SketchKind.SRHT, max_iters: int = 200,
              tol: float = 1e-12, seed: int = 0, x_star=None) -> SolveTrace:
    """Randomized-preconditioned conjugate gradient.

    Draws a single sketch S (never refreshed), takes the thin QR of S a to
    get the triangular preconditioner R, and runs CG on
    min_y ||a R^{-1} y - b||^2, whose normal matrix has all its
    eigenvalues near 1.  Returns x = R^{-1} y with the per-iteration trace
    in x-space.  Stops on the preconditioned normal-equation residual
    relative to its initial value.
    """
    a, b = problem.a, problem.b
    n, d = a.shape
    if m is None:
        m = default_pcg_sketch_size(d)
    if m < d:
        raise DimensionError(f"pcg_solve: sketch size m={m} below d={d}")
    err, error_kind = _error_fn(problem, x_star)

    start = time.perf_counter()
    rng = RngStream(seed)
    op = sample(kind, m, n, rng)
    sa = apply(op, a)
    t_sketch = time.perf_counter() - start
    _, r_fac = qr_thin(sa)
    t_factor = time.perf_counter() - start - t_sketch

    def from_y(y):
        return solve_triangular(r_fac, y, lower=False, check_finite=False)

    def normal_matvec(v):
        w = a @ from_y(v)
        return solve_triangular(r_fac.T, a.T @ w, lower=True, check_finite=False)

    y = np.zeros(d)
    rhs = solve_triangular(r_fac.T, a.T @ b, lower=True, check_finite=False)
    ref = float(np.linalg.norm(rhs))
    res = rhs.copy()
    p = res.copy()
    rs = float(res @ res)
    errors = [err(from_y(y))]
    cum = [time.perf_counter() - start]
    converged = math.sqrt(rs) <= tol * ref
    it = 0
    while it < max_iters and not converged:
        ap = normal_matvec(p)
        alpha = rs / float(p @ ap)
        y = y + alpha * p
        res = res - alpha * ap
        rs_new = float(res @ res)
        it += 1
        errors.append(err(from_y(y)))
        cum.append(time.perf_counter() - start)
        if math.sqrt(rs_new) <= tol * ref:
            converged = True
            break
        p = res + (rs_new / rs) * p
        rs = rs_new

    total = time.perf_counter() - start
    return SolveTrace(np.array(errors), error_kind, from_y(y), np.array(cum),
                      {"sketch": t_sketch, "factor": t_factor,
                       "iterate": total - t_sketch - t_factor},
                      converged=converged)
