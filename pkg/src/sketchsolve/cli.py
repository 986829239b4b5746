"""Command-line harness: theory tables, spectra, solves, benchmarks.

Every CSV starts with a ``# config: {...}`` comment carrying the full
resolved configuration and seed, so each output file reproduces itself.
Re-running a command with an identical configuration writes byte-identical
numeric payloads.  On failure the exit code is nonzero, a single
machine-parseable ``error: ...`` line goes to stderr, and partially
written outputs are removed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import theory
from ._util import parallel_map
from .datagen import generate_problem, load_matrix, load_vector, save_matrix, save_vector
from .errors import DimensionError, SketchSolveError
from .linalg import RngStream, direct_lstsq
from .sketch import SketchKind
from .solver import (
    IhsConfig,
    Problem,
    SolveTrace,
    StepSchedule,
    cg_solve,
    default_pcg_sketch_size,
    ihs_solve,
    pcg_solve,
)
from .spectra import empirical_spectrum

IHS_SOLVERS = {"ihs-gauss": SketchKind.GAUSSIAN, "ihs-haar": SketchKind.HAAR,
               "ihs-srht": SketchKind.SRHT}
ALL_SOLVERS = (*IHS_SOLVERS, "cg", "pcg", "direct")
RATE_FIT_ITERS = 10
FLOOR = 1e-26


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_csv(path: Path, config: dict, columns: list[str], rows) -> None:
    lines = ["# config: " + json.dumps(config, sort_keys=True), ",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _fit_rate(mean_curve: np.ndarray) -> float:
    """Geometric mean of successive error ratios over iterations 1..10.

    Stops the fit window early once the normalized error reaches the
    floating-point floor, so one-step convergence does not produce zeros.
    """
    last = min(RATE_FIT_ITERS, len(mean_curve) - 1)
    while last > 1 and mean_curve[last] <= FLOOR * mean_curve[0]:
        last -= 1
    if last < 1 or mean_curve[0] == 0.0:
        return 0.0
    return float((mean_curve[last] / mean_curve[0]) ** (1.0 / last))


def _run_solver(solver: str, problem: Problem, x_star, m, iters, refresh_period,
                tol, seed) -> SolveTrace:
    d = problem.shape[1]
    if solver in IHS_SOLVERS:
        if m is None:
            raise DimensionError(f"{solver} needs an explicit sketch size --m")
        cfg = IhsConfig(kind=IHS_SOLVERS[solver], m=m,
                        max_iters=iters if iters is not None else 20,
                        refresh_period=refresh_period, seed=seed)
        sched = (StepSchedule.optimal_gaussian() if solver == "ihs-gauss"
                 else StepSchedule.optimal_haar())
        return ihs_solve(problem, cfg, sched, x_star=x_star)
    if solver == "cg":
        return cg_solve(problem, max_iters=iters if iters is not None else 1000,
                        tol=tol, x_star=x_star)
    if solver == "pcg":
        return pcg_solve(problem, m=m if m is not None else default_pcg_sketch_size(d),
                         max_iters=iters if iters is not None else 200,
                         tol=tol, seed=seed, x_star=x_star)
    raise ValueError(f"unknown solver {solver!r}")


def _cmd_theory(args, written):
    rates = theory.orthogonal_rates(args.gamma, args.xi)
    d = max(2, round(args.gamma * args.cost_n))
    cost = theory.cost_model(args.cost_n, d, args.cost_eps)
    values = {
        "theta1": rates.inv_moment1,
        "theta2": rates.inv_moment2,
        "mu": rates.step_size,
        "rho_g": rates.gaussian_rate,
        "rho_h": rates.rate,
        "support_lower_bound": theory.support_lower_bound(args.gamma, args.xi),
        "cost_ratio": cost.ratio,
    }
    if args.json:
        print(json.dumps({k: v for k, v in values.items()}, sort_keys=True))
    else:
        for key, val in values.items():
            print(f"{key}={_fmt(val)}")


def _cmd_spectra(args, written):
    report = empirical_spectrum(args.kind, args.n, args.d, args.m, args.trials,
                                bins=args.bins, rng=RngStream(args.seed))
    config = {"command": "spectra", "kind": args.kind, "n": args.n, "d": args.d,
              "m": args.m, "trials": args.trials, "bins": args.bins, "seed": args.seed}
    col_ratio, sketch_ratio = args.d / args.n, args.m / args.n
    shape = args.d / args.m
    rows = []
    for i in range(len(report.hist_density)):
        left, right = report.hist_edges[i], report.hist_edges[i + 1]
        center = 0.5 * (left + right)
        mp = theory.mp_density(center, shape)
        if sketch_ratio < 1.0 and center > 0.0:
            orth = sketch_ratio * theory.orthogonal_density(
                sketch_ratio * center, col_ratio, sketch_ratio, eps=theory.OVERLAY_EPS)
        else:
            orth = 0.0
        rows.append((left, right, report.hist_density[i], mp, orth))
    out = Path(args.out)
    written.append(out)
    _write_csv(out, config,
               ["bin_left", "bin_right", "density_empirical", "density_mp",
                "density_haar_theory"], rows)
    sidecar = out.with_suffix(".json")
    written.append(sidecar)
    _write_json(sidecar, {
        "config": config,
        "theta1_hat": report.inv_moment1_hat,
        "theta2_hat": report.inv_moment2_hat,
        "ks_to_mp": report.ks_to_mp,
        "ks_to_haar_theory": report.ks_to_orthogonal_theory,
        "realized_gamma": col_ratio,
        "realized_xi": sketch_ratio,
        "eigenvalue_min": float(report.eigenvalues[0]),
        "eigenvalue_max": float(report.eigenvalues[-1]),
    })


def _cmd_solve(args, written):
    a = load_matrix(args.matrix)
    b = load_vector(args.rhs)
    problem = Problem(a, b)
    x_star = direct_lstsq(a, b)
    config = {"command": "solve", "matrix": str(args.matrix), "rhs": str(args.rhs),
              "solver": args.solver, "m": args.m, "iters": args.iters,
              "refresh_period": args.refresh_period, "seed": args.seed,
              "tol": args.tol}

    if args.solver == "direct":
        import time

        t0 = time.perf_counter()
        x = direct_lstsq(a, b)
        elapsed = time.perf_counter() - t0
        residual = float(np.linalg.norm(a.T @ (a @ x - b)))
        rows = [(0, residual, elapsed)]
        trace_payload = {"error_kind": "residual", "converged": True,
                         "phase_seconds": {"sketch": 0.0, "factor": elapsed, "iterate": 0.0}}
    else:
        trace = _run_solver(args.solver, problem, x_star, args.m, args.iters,
                            args.refresh_period, args.tol, args.seed)
        x = trace.x_final
        rows = [(t, trace.errors[t], trace.cum_seconds[t])
                for t in range(len(trace.errors))]
        trace_payload = {"error_kind": trace.error_kind, "converged": trace.converged,
                         "phase_seconds": trace.phase_seconds}

    out = Path(args.out)
    written.append(out)
    _write_csv(out, config, ["iter", "sq_error_or_residual", "cum_seconds"], rows)
    sidecar = out.with_suffix(".json")
    written.append(sidecar)
    _write_json(sidecar, {"config": config, "final_x": [float(v) for v in x],
                          **trace_payload})


def _bench_one(solver: str, m: int, problem: Problem, x_star, args) -> dict:
    base = RngStream(args.seed)
    trials = 1 if solver in ("cg", "direct") else args.trials

    def one_trial(t: int) -> np.ndarray:
        trial_seed = base.substream(1000 + t).stream
        trace = _run_solver(solver, problem, x_star, m, args.iters,
                            args.refresh_period, 0.0, trial_seed)
        errs = trace.errors.astype(float)
        if len(errs) < args.iters + 1:   # converged early: hold the floor value
            errs = np.concatenate([errs, np.full(args.iters + 1 - len(errs), errs[-1])])
        return errs / errs[0]

    curves = np.array(parallel_map(one_trial, range(trials)))
    mean = curves.mean(axis=0)
    std = curves.std(axis=0)
    n, d = problem.shape
    rates = theory.orthogonal_rates(d / n, m / n)
    return {"solver": solver, "m": m, "mean": mean, "std": std,
            "empirical_rate": _fit_rate(mean), "rho_h": rates.rate,
            "rho_g": rates.gaussian_rate, "trials": trials}


def _cmd_bench(args, written):
    if args.preset != "synthetic":
        raise ValueError(f"unknown preset {args.preset!r}")
    m_list = [int(tok) for tok in args.m_list.split(",") if tok]
    solvers = [tok.strip() for tok in args.solvers.split(",") if tok.strip()]
    for solver in solvers:
        if solver not in ALL_SOLVERS or solver == "direct":
            raise ValueError(f"bench does not support solver {solver!r}")
    problem = generate_problem(args.n, args.d, args.decay, args.seed)
    x_star = direct_lstsq(problem.a, problem.b)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = []
    for solver in solvers:
        for m in m_list:
            result = _bench_one(solver, m, problem, x_star, args)
            config = {"command": "bench", "preset": args.preset, "n": args.n,
                      "d": args.d, "decay": args.decay, "solver": solver, "m": m,
                      "trials": result["trials"], "iters": args.iters,
                      "refresh_period": args.refresh_period, "seed": args.seed}
            path = out_dir / f"{solver}_m{m}.csv"
            written.append(path)
            _write_csv(path, config,
                       ["iter", "mean_rel_sq_error", "std_rel_sq_error"],
                       [(t, result["mean"][t], result["std"][t])
                        for t in range(len(result["mean"]))])
            summary.append({k: result[k] for k in
                            ("solver", "m", "empirical_rate", "rho_h", "rho_g", "trials")})
    summary_path = out_dir / "summary.json"
    written.append(summary_path)
    _write_json(summary_path, {
        "config": {"command": "bench", "preset": args.preset, "n": args.n,
                   "d": args.d, "decay": args.decay, "m_list": m_list,
                   "solvers": solvers, "trials": args.trials, "iters": args.iters,
                   "refresh_period": args.refresh_period, "seed": args.seed},
        "results": summary,
    })


def _cmd_generate(args, written):
    problem = generate_problem(args.n, args.d, args.decay, args.seed)
    matrix_path, rhs_path = Path(args.out_matrix), Path(args.out_rhs)
    written.extend([matrix_path, rhs_path])
    save_matrix(matrix_path, problem.a, fmt=args.format)
    save_vector(rhs_path, problem.b, fmt=args.format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchsolve",
        description="Randomized-sketching least-squares solvers and their spectral theory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="print closed-form rates and bounds")
    p.add_argument("--gamma", type=float, required=True, help="column ratio d/n")
    p.add_argument("--xi", type=float, required=True, help="sketch ratio m/n")
    p.add_argument("--cost-n", type=int, default=4096)
    p.add_argument("--cost-eps", type=float, default=1e-6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("spectra", help="sample sketched-Gram spectra vs theory")
    p.add_argument("--kind", choices=[k.value for k in SketchKind], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="histogram CSV path (JSON sidecar alongside)")
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("solve", help="solve a least-squares instance from matrix files")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--solver", choices=ALL_SOLVERS, required=True)
    p.add_argument("--m", type=int, default=None, help="sketch size (ihs-*, pcg)")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--refresh-period", type=int, default=1,
                   help="1 = every iteration, k = every k, 0 = never refresh")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", required=True, help="trace CSV path (JSON sidecar alongside)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="benchmark solvers on the synthetic problem")
    p.add_argument("--preset", default="synthetic")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--decay", type=float, default=0.98)
    p.add_argument("--m-list", required=True, help="comma-separated sketch sizes")
    p.add_argument("--solvers", required=True, help="comma-separated solver names")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--refresh-period", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("generate", help="write a synthetic problem to matrix files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--decay", type=float, default=0.98)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-matrix", required=True)
    p.add_argument("--out-rhs", required=True)
    p.add_argument("--format", choices=["csv", "binary"], default="csv")
    p.set_defaults(func=_cmd_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    written: list[Path] = []
    try:
        args.func(args, written)
        return 0
    except (SketchSolveError, OSError, ValueError) as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
