"""Pseudo-spectral solver for stationary nonlocal equations with two fractional Laplacians.

Solves ``-[(-Delta)^s1 + (-Delta)^s2] u + eps * K * g(u) + f = 0`` in a periodic
3D box by Picard iteration around the linear solution ``u0`` and checks the
explicit existence, contraction and continuity bounds numerically.
"""

from .analysis import (
    BoundsReport,
    MinimizationProblem,
    NormReport,
    compute_norms,
    compute_Q,
    contraction_constant,
    interval_and_M,
    radius_split_minimizer,
    sigma_and_continuity,
    sobolev_ratio,
    smallness_threshold,
)
from .estimators import MixedFractionalPoisson, StationarySolver
from .exceptions import (
    AssumptionError,
    BallExitError,
    ConfigError,
    GridMismatchError,
    IntervalExitError,
    NonContractiveError,
    NonConvergenceError,
)
from .fixed_point import (
    FixedPointConfig,
    NonlinearityDef,
    PicardTrace,
    apply_map_tg,
    continuity_experiment,
    contraction_probe,
    picard_solve,
)
from .linear import LinearSolveReport, check_orthogonality, sequences_experiment, solve_poisson
from .scenarios import ScenarioSpec, build_scenario, get_scenario, list_scenarios
from .spectral import (
    Field,
    FracExponents,
    GridSpec,
    SpectralField,
    apply_fractional_laplacian,
    apply_mixed_operator,
    convolve,
    forward_transform,
    inverse_transform,
)

__version__ = "0.1.0"
