"""AMP for LASSO with threshold policies, scalar state evolution, and a
phase-transition experiment harness."""

from .amp import (
    AmpState,
    AmpTrace,
    amp_run,
    fixed_detection_tau,
    fixed_false_alarm_tau,
    gaussianity_stats,
    median_abs_sigma,
)
from .exceptions import (
    AmpPathError,
    BracketFailure,
    DimensionError,
    Divergence,
    NegativeLambda,
    NonConvergence,
    RangeError,
    RankError,
)
from .experiments import (
    PhaseGrid,
    PhaseGridConfig,
    SweepConfig,
    estimate_half_success_rho,
    interpolate_display_grid,
    lambda_sweep_empirical,
    model_for_instance,
    phase_transition_grid,
    rho_of_delta,
    stojnic_curve,
)
from .instances import (
    InstanceConfig,
    Observables,
    ProblemInstance,
    SparseSpec,
    compute_observables,
    dump_instance,
    load_instance,
    sample_instance,
)
from .lasso import LassoResult, kkt_residual, lasso_solve, power_iteration_sq_norm
from .policies import FixedDetection, FixedFalseAlarm, FixedThreshold, ThresholdPolicy
from .priors import (
    Prior,
    PsiParams,
    atom_risk,
    detection_prob,
    parse_prior,
    point_mass_at_zero,
    psi_map,
    risk,
    risk_derivative,
    soft_threshold,
    sparse_prior,
    std_normal_cdf,
    std_normal_pdf,
)
from .rng import splitmix64, standard_normal, substreams, trial_seed
from .state_evolution import (
    SEModel,
    SEPoint,
    SETrajectory,
    beta_of_lambda,
    calibrate_gamma,
    lambda_of_beta,
    lasso_path,
    se_trajectory,
    solve_sigma_for_beta,
    solve_tau_for_detection,
)

__version__ = "0.1.0"
