"""Randomized-sketching least-squares solvers and their spectral theory."""

from .errors import (
    BadRatiosError,
    DimensionError,
    EmptySamplesError,
    InitRequiresXStarError,
    InvalidZError,
    NoConvergenceError,
    NotPositiveDefiniteError,
    NotPowerOfTwoError,
    PoleInputError,
    RankDeficientError,
    SketchSolveError,
    TooLargeError,
)
from .linalg import (
    RngStream,
    cholesky_factor,
    cholesky_solve,
    direct_lstsq,
    qr_thin,
    sym_eigvals,
)
from .sketch import SketchKind, SketchOperator, apply, dense, fwht_inplace, sample
from .theory import (
    CostModel,
    SketchRates,
    bernoulli_s_transform,
    cost_model,
    eta_fixed_point_residual,
    eta_transform,
    free_product_residual,
    gaussian_rates,
    mp_cdf,
    mp_density,
    mp_support,
    orthogonal_cdf,
    orthogonal_density,
    orthogonal_density_moment,
    orthogonal_rates,
    stieltjes,
    support_lower_bound,
    unit_atom_mass,
)
from .solver import (
    IhsConfig,
    Problem,
    SolveTrace,
    StepSchedule,
    cg_solve,
    default_pcg_sketch_size,
    ihs_solve,
    iterations_to,
    pcg_solve,
)
from .spectra import (
    SpectralReport,
    empirical_spectrum,
    inverse_moment_estimates,
    ks_distance,
    ks_two_sample,
)
from .datagen import generate_problem, load_matrix, load_vector, save_matrix, save_vector

__version__ = "0.1.0"
