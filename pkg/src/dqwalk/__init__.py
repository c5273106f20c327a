"""Decoherent Hadamard walk toolkit.

Exact engines (path sum, renewal recursion, density-operator evolution),
a trajectory Monte Carlo sampler, closed-form generating functions and
moment/limit formulas, and series utilities for cross-validating them.
"""

from dqwalk.acceptance import CheckResult, run_all, run_criterion
from dqwalk.analytic import (
    CF_K_GRID,
    GFPoint,
    MomentReport,
    SigmaValues,
    cf_gap,
    gaussian_limit_cf,
    gf_point,
    ks_to_limit,
    limit_variance,
    longterm_mean_right,
    longterm_variance,
    moment_report,
    phat_right,
    phat_symmetric,
    phat_symmetric_assembled,
    pseudoquantum_time,
    pure_variance_exact,
    second_deriv_gf,
    second_root_estimate,
    second_root_expansion,
    sigma_eval,
)
from dqwalk.exact import (
    PATH_SUM_T_MAX,
    Moments,
    PositionDistribution,
    ProbabilityTable,
    WalkParams,
    density_history,
    moments,
    path_sum_oracle,
    position_distribution,
    renewal_evolve,
    superoperator_evolve,
    tv_distance,
)
from dqwalk.mc import (
    EnsembleSpec,
    EnsembleSummary,
    sample_ensemble,
    sample_trajectory,
    trajectory_stream,
)
from dqwalk.pure import (
    INITIAL_LABELS,
    AmplitudeTable,
    PureTable,
    SpectralForm,
    amplitude_history,
    born_weights,
    evolution_matrix_fourier,
    hadamard_step,
    initial_state,
    pure_char,
    pure_probability_table,
    spectral_form,
    step_matrix_fourier,
)
from dqwalk.series import (
    DEFAULT_CONTOUR,
    ContourSpec,
    QhatMatrix,
    decoherence_equation_residual,
    qhat_truncated,
    suggested_truncation,
    taylor_coeffs,
)

__version__ = "0.1.0"
