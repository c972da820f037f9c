"""STAR-RIS assisted cell-free massive MIMO downlink toolkit."""

__version__ = "0.1.0"

from .config import SystemConfig, default_config, dbm_to_mw, mw_to_dbm
from .scenario import Scenario, assign_pilots, generate_scenario, path_loss
from .star_ris import (
    ChannelStatistics,
    StarRisState,
    build_correlation,
    build_ris_state,
    build_theta,
    channel_covariance,
    coupling_matrix,
    correlation_sqrt,
    sample_channel,
)
from .estimation import (
    EstimationStatistics,
    estimation_stats,
    simulate_pilot_estimation,
)
from .spectral_efficiency import (
    DetectorContext,
    MomentEstimates,
    SeReport,
    closed_form_se,
    mmse_sic_se,
    monte_carlo_moments,
    network_se,
)
from .power_allocation import (
    FpCoefficients,
    FpState,
    PowerAllocation,
    admm_fp_optimize,
    admm_inner,
    build_fp_coefficients,
    evaluate_f2,
    evaluate_objective,
    fractional_power_control,
    no_power_control,
    project_ball,
    update_gamma,
    update_varpi,
)
from .experiment import (
    ExperimentSpec,
    figure_2,
    figure_3,
    figure_4,
    run_experiment,
    validate_run,
)

__all__ = [
    "SystemConfig", "default_config", "dbm_to_mw", "mw_to_dbm",
    "Scenario", "assign_pilots", "generate_scenario", "path_loss",
    "ChannelStatistics", "StarRisState", "build_correlation",
    "build_ris_state", "build_theta", "channel_covariance",
    "coupling_matrix", "correlation_sqrt", "sample_channel",
    "EstimationStatistics", "estimation_stats", "simulate_pilot_estimation",
    "DetectorContext", "MomentEstimates", "SeReport", "closed_form_se",
    "mmse_sic_se", "monte_carlo_moments", "network_se",
    "FpCoefficients", "FpState", "PowerAllocation", "admm_fp_optimize",
    "admm_inner", "build_fp_coefficients", "evaluate_f2",
    "evaluate_objective", "fractional_power_control", "no_power_control",
    "project_ball", "update_gamma", "update_varpi",
    "ExperimentSpec", "figure_2", "figure_3", "figure_4",
    "run_experiment", "validate_run",
]
