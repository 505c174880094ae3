"""Sparse weak-interaction Hawkes networks: simulation, recovery, bounds."""

from .model import (
    HawkesParams,
    SparseInteractionMatrix,
    TrueSupport,
    build_subclass_instance,
    params_from_json,
    params_to_json,
    permute_params,
    sample_random_instance,
    support_of,
    validate,
)
from .moments import (
    StationaryMoments,
    c_path,
    population_screening_scores,
    screening_gap,
    stationary_covariance,
    stationary_mean,
    stationary_moments,
)
from .simulate import (
    BinnedSample,
    EventLog,
    SimulationCapError,
    bin_and_clip,
    default_burn_in,
    simulate_cluster,
    simulate_thinning,
    state_at,
)
from .estimator import (
    EstimatorConfig,
    RecoveredNetwork,
    RecoveryMetrics,
    evaluate,
    local_least_squares,
    recover,
    screening_scores,
    select_candidates,
    threshold_support,
)
from .fano import FanoInputs, critical_time, fano_error_floor, kl_budget
from .sweep import (
    SweepSpec,
    SweepResult,
    estimate_threshold_time,
    fit_log_scaling,
    run_cell,
    run_sweep,
    wilson_interval,
)

__version__ = "0.1.0"
