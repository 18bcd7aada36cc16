"""Closed-form rate analysis, ACM design and Monte-Carlo simulation for
large-antenna aeronautical links with pilot contamination."""

from .acm import (AcmMode, AcmTable, DEFAULT_MODES, design_thresholds,
                  mode_data_rates, rate_curve, select_mode,
                  spectral_efficiency)
from .channel import (BOLTZMANN, ChannelRealization, ChannelStats,
                      SystemConfig, average_received_power,
                      build_channel_stats, compose_channel, draw_los,
                      draw_scattered, exponential_correlation, noise_power,
                      path_loss_db, received_power, rician_split,
                      subcarrier_noise_variance)
from .errors import (AeroAcmError, BelowMinimumSeparation, ConfigError,
                     DimensionMismatch, DomainError, EmptySamples,
                     EmptyTable, IndexOutOfRange, InvalidAxis, NotHermitian,
                     NotPSD, OutOfRange, Singular)
from .estimation import (EstimationStats, PilotObservation,
                         build_estimation_stats, diagonal_block, dft_pilot,
                         error_covariance, estimation_covariance,
                         mean_outer, mmse_estimate, simulate_pilot_rx, unvec,
                         vec)
from .montecarlo import (SweepResult, TrialResult, ccdf, config_for_axis,
                         run_sweep, run_trial, simulate_point, trial_stream)
from .numerics import (RngStream, gaussian_matrix, hermitian_sqrt, kron,
                       solve_hpd)
from .precoding import (Precoder, TermPowers, decompose_terms, mf_precoder,
                        received_symbol)
from .sinr import (LinkBudget, SinrBreakdown, analyze_link, asymptotic_sinr,
                   budget_from_config, closed_form_rate,
                   cross_interference_term, desired_power,
                   interference_plus_noise, rate_per_dra,
                   self_interference_term, variance_term)

__version__ = "0.1.0"

__all__ = [
    "AcmMode", "AcmTable", "DEFAULT_MODES", "design_thresholds",
    "mode_data_rates", "rate_curve", "select_mode", "spectral_efficiency",
    "BOLTZMANN", "ChannelRealization", "ChannelStats", "SystemConfig",
    "average_received_power", "build_channel_stats", "compose_channel",
    "draw_los", "draw_scattered", "exponential_correlation", "noise_power",
    "path_loss_db", "received_power", "rician_split",
    "subcarrier_noise_variance",
    "AeroAcmError", "BelowMinimumSeparation", "ConfigError",
    "DimensionMismatch", "DomainError", "EmptySamples", "EmptyTable",
    "IndexOutOfRange", "InvalidAxis", "NotHermitian", "NotPSD", "OutOfRange",
    "Singular",
    "EstimationStats", "PilotObservation", "build_estimation_stats",
    "diagonal_block", "dft_pilot", "error_covariance",
    "estimation_covariance", "mean_outer", "mmse_estimate",
    "simulate_pilot_rx", "unvec", "vec",
    "SweepResult", "TrialResult", "ccdf", "config_for_axis", "run_sweep",
    "run_trial", "simulate_point", "trial_stream",
    "RngStream", "gaussian_matrix", "hermitian_sqrt", "kron", "solve_hpd",
    "Precoder", "TermPowers", "decompose_terms", "mf_precoder",
    "received_symbol",
    "LinkBudget", "SinrBreakdown", "analyze_link", "asymptotic_sinr",
    "budget_from_config", "closed_form_rate", "cross_interference_term",
    "desired_power", "interference_plus_noise", "rate_per_dra",
    "self_interference_term", "variance_term",
]
