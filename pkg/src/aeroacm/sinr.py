"""Closed-form asymptotic SINR and achievable rate.

In the large-transmit-antenna limit the matched-filter SINR at receive
antenna n* separates into deterministic traces of the second-order channel
and estimation matrices:

    desired  = P (Tr Theta_(n*,n*))^2
    variance = P  Tr{Xi_(n*,n*) Theta_(n*,n*)}
    self     = P  sum_{n != n*} T_n
    cross    = Pbar_data * sum_a sum_n T'_n
    sinr     = desired / (variance + self + cross + sigma_w^2)

where each T-trace pairs an interfering stream's transmit-side statistics
(mean outer product, estimate covariance and the Omega coupling block) with
the desired antenna's mean-plus-correlation block. Two evaluation modes are
exposed: "theoretical" consumes the interfering links' own deterministic
statistics, "approximate" substitutes the desired link's (the only one a
practical transmitter can know). Aggregate contaminator power during
training uses the uniform-distance average over the full operating range;
the data-phase cross multiplier averages over [link_distance, d_max], where
the co-channel transmitters actually are.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .channel import (ChannelStats, SystemConfig, average_received_power,
                      build_channel_stats, received_power,
                      subcarrier_noise_variance)
from .errors import DimensionMismatch, DomainError, IndexOutOfRange
from .estimation import EstimationStats, build_estimation_stats, diagonal_block

SINR_CAP = 1e12


@dataclass(frozen=True)
class LinkBudget:
    """Received powers and noise entering the SINR closed form.

    ``p_desired`` is the desired-link received power, ``p_bar`` the average
    contaminator power during training, ``p_bar_data`` the average
    co-channel power during data transmission (defaults to ``p_bar`` when
    not given), ``sigma_w2`` the per-subcarrier noise variance.
    """

    p_desired: float
    p_bar: float
    sigma_w2: float
    num_interferers: int
    p_bar_data: float | None = None

    def __post_init__(self) -> None:
        if self.p_desired <= 0:
            raise DomainError("p_desired must be > 0")
        if self.p_bar < 0 or self.sigma_w2 < 0:
            raise DomainError("powers must be >= 0")
        if self.num_interferers < 0:
            raise DomainError("num_interferers must be >= 0")

    @property
    def data_power(self) -> float:
        return self.p_bar if self.p_bar_data is None else self.p_bar_data

    @property
    def training_powers(self) -> tuple[float, ...]:
        """Per-contaminator received powers during training."""
        return (self.p_bar,) * self.num_interferers


def budget_from_config(config: SystemConfig) -> LinkBudget:
    """Derive the link budget of a scenario.

    Training contaminators (the other receiving aircraft) are spread over
    the whole operating range; data-phase co-channel transmitters are at
    least as far as the desired link.
    """
    p = received_power(config.tx_power_per_antenna, config.carrier_freq,
                       config.link_distance)
    p_bar = average_received_power(config.tx_power_per_antenna,
                                   config.carrier_freq, config.d_min,
                                   config.d_max)
    p_bar_data = average_received_power(config.tx_power_per_antenna,
                                        config.carrier_freq,
                                        config.link_distance, config.d_max)
    return LinkBudget(p_desired=p, p_bar=p_bar,
                      sigma_w2=subcarrier_noise_variance(config),
                      num_interferers=config.num_interferers,
                      p_bar_data=p_bar_data)


def asymptotic_quadratic_form(m: np.ndarray, upsilon: np.ndarray,
                              a: np.ndarray) -> complex:
    """Deterministic limit of ``x^H A x`` for ``x ~ CN(m/sqrt(N), Upsilon/N)``.

    Equals ``Tr{(m m^H / N + Upsilon / N) A}``; the trace lemma states that
    the random quadratic form converges to this value as N grows.
    """
    m = np.asarray(m, dtype=np.complex128).reshape(-1)
    upsilon = np.asarray(upsilon, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    n = m.size
    if upsilon.shape != (n, n) or a.shape != (n, n):
        raise DimensionMismatch("m, upsilon and a sizes disagree")
    return (np.vdot(m, a @ m) + np.trace(upsilon @ a)) / n


def desired_power(p_desired: float, theta_block: np.ndarray) -> float:
    """Coherent beamforming power: ``P (Tr Theta)^2``."""
    tr = float(np.trace(np.asarray(theta_block)).real)
    return p_desired * tr**2


def variance_term(p_desired: float, xi_block: np.ndarray,
                  theta_block: np.ndarray) -> float:
    """Residual power of the matched-gain fluctuation: ``P Tr{Xi Theta}``."""
    return p_desired * float(np.trace(np.asarray(xi_block)
                                      @ np.asarray(theta_block)).real)


def _stream_trace(stats: ChannelStats, est_tx: EstimationStats,
                  n_tx: int, theta_like_rx: np.ndarray) -> float:
    """Trace pairing a transmit stream's statistics with a receive block.

    ``Tr{(nu^2 M_(n,n) + (Phi_(n,n) + c0 I + s*s2 R_(n,n)) Omega_(n,n)) *
    theta_like_rx}`` for transmit stream index ``n_tx`` (0-based).
    """
    n_t = stats.n_t
    s = sum(est_tx.rho_ratios)
    c0 = est_tx.snr_ratio
    s2r = stats.varsigma**2 * stats.corr_block(n_tx)
    m_b = diagonal_block(est_tx.m_mean, n_tx + 1, n_t)
    phi_b = diagonal_block(est_tx.phi, n_tx + 1, n_t)
    omega_b = est_tx.omega_blocks[n_tx]
    inner = (stats.nu**2 * m_b
             + (phi_b + c0 * np.eye(n_t) + s * s2r) @ omega_b)
    return float(np.trace(inner @ theta_like_rx).real)


def _rx_block(stats: ChannelStats, est: EstimationStats, n_r_star: int) -> np.ndarray:
    """``nu^2 M_(n*,n*) + varsigma^2 R_(n*,n*)`` for the desired antenna."""
    m_star = diagonal_block(est.m_mean, n_r_star + 1, stats.n_t)
    return (stats.nu**2 * m_star
            + stats.varsigma**2 * stats.corr_block(n_r_star))


def self_interference_term(budget: LinkBudget, stats: ChannelStats,
                           est: EstimationStats, n_r_star: int) -> float:
    """Power leaked into antenna n* by the desired link's other streams."""
    if not 0 <= n_r_star < stats.n_r:
        raise IndexOutOfRange(f"antenna {n_r_star} outside 0..{stats.n_r - 1}")
    rx = _rx_block(stats, est, n_r_star)
    total = 0.0
    for n in range(stats.n_r):
        if n == n_r_star:
            continue
        total += _stream_trace(stats, est, n, rx)
    return budget.p_desired * total


def cross_interference_term(budget: LinkBudget, stats: ChannelStats,
                            est_interferer: EstimationStats,
                            est_desired: EstimationStats,
                            use_remark_substitution: bool = False,
                            n_r_star: int = 0) -> float:
    """Aggregate co-channel interference power at antenna n*.

    Each interfering transmitter contributes one trace per stream, built
    from its own estimation statistics. With ``use_remark_substitution`` its
    (unknowable) deterministic blocks are replaced by the desired link's;
    otherwise the caller supplies the true interferer statistics via
    ``est_interferer``.
    """
    if budget.num_interferers == 0:
        return 0.0
    est_tx = est_desired if use_remark_substitution else est_interferer
    rx = _rx_block(stats, est_desired, n_r_star)
    per_interferer = sum(_stream_trace(stats, est_tx, n, rx)
                         for n in range(stats.n_r))
    return budget.data_power * budget.num_interferers * per_interferer


def interference_plus_noise(budget: LinkBudget, stats: ChannelStats,
                            est: EstimationStats, n_r_star: int,
                            mode: str = "theoretical",
                            est_interferer: EstimationStats | None = None) -> float:
    """Total denominator of the asymptotic SINR at antenna n*."""
    if mode not in ("theoretical", "approximate"):
        raise DomainError(f"unknown mode {mode!r}")
    xi_b = diagonal_block(est.xi, n_r_star + 1, stats.n_t)
    var = variance_term(budget.p_desired, xi_b, est.theta_blocks[n_r_star])
    self_t = self_interference_term(budget, stats, est, n_r_star)
    cross = cross_interference_term(
        budget, stats,
        est_interferer if est_interferer is not None else est,
        est, use_remark_substitution=(mode == "approximate"),
        n_r_star=n_r_star)
    return var + self_t + cross + budget.sigma_w2


def asymptotic_sinr(budget: LinkBudget, stats: ChannelStats,
                    est: EstimationStats, n_r_star: int,
                    mode: str = "theoretical",
                    est_interferer: EstimationStats | None = None,
                    cap: float = SINR_CAP) -> float:
    """Closed-form SINR at antenna n*, capped for degenerate noiseless cases."""
    num = desired_power(budget.p_desired, est.theta_blocks[n_r_star])
    den = interference_plus_noise(budget, stats, est, n_r_star, mode,
                                  est_interferer)
    if den <= 0 or num / den > cap:
        return cap
    return num / den


def rate_per_dra(sinrs: Sequence[float]) -> float:
    """Achievable rate per receive antenna: mean of log2(1 + sinr)."""
    sinrs = np.asarray(sinrs, dtype=float)
    if sinrs.size == 0:
        raise DomainError("need at least one SINR value")
    if np.any(sinrs < 0):
        raise DomainError("SINR values must be >= 0")
    return float(np.mean(np.log2(1.0 + sinrs)))


@dataclass(frozen=True)
class SinrBreakdown:
    """Per-antenna SINR with its power budget, plus the per-antenna rate."""

    desired: float
    est_error_term: float
    inter_antenna_term: float
    interferer_term: float
    noise: float
    sinr: float
    rate_per_dra: float


def analyze_link(config: SystemConfig, mode: str = "theoretical",
                 h_d: np.ndarray | None = None, phase: float | None = None,
                 consistent_sigma: bool = False) -> SinrBreakdown:
    """Closed-form analysis of one scenario.

    Without an explicit deterministic component all receive antennas are
    statistically identical, so one antenna is evaluated and the rate is its
    log term. With an explicit ``h_d`` the antennas differ and the rate
    averages all of them.
    """
    if mode not in ("theoretical", "approximate"):
        raise DomainError(f"unknown mode {mode!r}")
    stats = build_channel_stats(config, h_d=h_d, phase=phase)
    budget = budget_from_config(config)
    est = build_estimation_stats(stats, budget.p_desired,
                                 budget.training_powers, budget.sigma_w2,
                                 consistent_sigma=consistent_sigma)
    symmetric = stats.h_d is None
    indices = [0] if symmetric else list(range(stats.n_r))
    sinrs = []
    first: SinrBreakdown | None = None
    for n_star in indices:
        num = desired_power(budget.p_desired, est.theta_blocks[n_star])
        xi_b = diagonal_block(est.xi, n_star + 1, stats.n_t)
        var = variance_term(budget.p_desired, xi_b, est.theta_blocks[n_star])
        self_t = self_interference_term(budget, stats, est, n_star)
        cross = cross_interference_term(budget, stats, est, est,
                                        use_remark_substitution=(mode == "approximate"),
                                        n_r_star=n_star)
        den = var + self_t + cross + budget.sigma_w2
        sinr = SINR_CAP if (den <= 0 or num / den > SINR_CAP) else num / den
        sinrs.append(sinr)
        if first is None:
            first = SinrBreakdown(desired=num, est_error_term=var,
                                  inter_antenna_term=self_t,
                                  interferer_term=cross,
                                  noise=budget.sigma_w2, sinr=sinr,
                                  rate_per_dra=0.0)
    if symmetric:
        sinrs = sinrs * stats.n_r
    assert first is not None
    return replace(first, rate_per_dra=rate_per_dra(sinrs))


def closed_form_rate(config: SystemConfig, mode: str = "theoretical",
                     **kwargs) -> float:
    """Shorthand for the per-antenna rate of :func:`analyze_link`."""
    return analyze_link(config, mode=mode, **kwargs).rate_per_dra
