"""Link budget and spatially correlated Rician channel model.

The propagation model is the free-space air-to-air link: path loss
``-154.06 + 20 log10(f) + 20 log10(d)`` dB, thermal noise with a rounded
Boltzmann constant of 1.3e-23 J/K, and uniform-distance averaging for
interferer powers. The channel between two aircraft is Rician,

    H = nu * H_d + varsigma * H_r,      nu^2 = K/(K+1), varsigma^2 = 1/(K+1),

with a deterministic component H_d normalized to Tr{H_d H_d^H} = N_t N_r and
a scattered component H_r following the Kronecker correlation model: an
exponential correlation matrix across the N_t transmit-side antennas and
uncorrelated receive-side antennas (identity). Matrices are kept in the
training-side orientation (N_t rows, N_r columns): the receiving aircraft
sends pilots from its N_r antennas and the N_t-antenna side estimates, so
reciprocity gives the data-side channel as the conjugate transpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, DomainError
from .numerics import RngStream, gaussian_matrix, hermitian_sqrt, kron

# Rounded Boltzmann constant used by the noise-power formula. The free-space
# constant -154.06 dB and the golden link-budget numbers are consistent with
# this rounded value, not with the CODATA 1.380649e-23.
BOLTZMANN = 1.3e-23

# Default scenario: 4 interferers, 4 receive / 32 transmit antennas, 1 W per
# antenna, 512 subcarriers with a length-32 cyclic prefix, Rician factor 5,
# 6 MHz at 5 GHz, correlation 0.1, 4 dB noise figure, 10 km link inside a
# 5..740 km operating range at 290 K.
_DEFAULTS = dict(
    num_interferers=4,
    num_dra=4,
    num_dta=32,
    tx_power_per_antenna=1.0,
    num_subcarriers=512,
    cp_length=32,
    rician_k=5.0,
    bandwidth=6e6,
    carrier_freq=5e9,
    correlation_factor=0.1,
    noise_figure=4.0,
    link_distance=10e3,
    d_min=5e3,
    d_max=740e3,
    ref_temperature=290.0,
)


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters for one aeronautical link under interference.

    Distances are meters, powers watts, bandwidth and carrier frequency Hz,
    temperature kelvin. ``num_dta`` (N_t) is the transmit-side antenna count,
    ``num_dra`` (N_r) the receive-side count, with N_r <= N_t.
    """

    num_interferers: int = _DEFAULTS["num_interferers"]
    num_dra: int = _DEFAULTS["num_dra"]
    num_dta: int = _DEFAULTS["num_dta"]
    tx_power_per_antenna: float = _DEFAULTS["tx_power_per_antenna"]
    num_subcarriers: int = _DEFAULTS["num_subcarriers"]
    cp_length: int = _DEFAULTS["cp_length"]
    rician_k: float = _DEFAULTS["rician_k"]
    bandwidth: float = _DEFAULTS["bandwidth"]
    carrier_freq: float = _DEFAULTS["carrier_freq"]
    correlation_factor: float = _DEFAULTS["correlation_factor"]
    noise_figure: float = _DEFAULTS["noise_figure"]
    link_distance: float = _DEFAULTS["link_distance"]
    d_min: float = _DEFAULTS["d_min"]
    d_max: float = _DEFAULTS["d_max"]
    ref_temperature: float = _DEFAULTS["ref_temperature"]

    def __post_init__(self) -> None:
        if self.num_interferers < 0:
            raise DomainError("num_interferers must be >= 0")
        if self.num_dra < 1 or self.num_dta < 1:
            raise DomainError("antenna counts must be >= 1")
        if self.num_dra > self.num_dta:
            raise DomainError(
                f"num_dra ({self.num_dra}) must not exceed num_dta ({self.num_dta})"
            )
        if self.cp_length >= self.num_subcarriers:
            raise DomainError("cp_length must be smaller than num_subcarriers")
        if self.rician_k < 0:
            raise DomainError("rician_k must be >= 0")
        if not 0.0 <= self.correlation_factor < 1.0:
            raise DomainError("correlation_factor must lie in [0, 1)")
        for name in ("tx_power_per_antenna", "bandwidth", "carrier_freq",
                     "link_distance", "d_min", "d_max", "ref_temperature"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be > 0")
        if self.num_subcarriers < 1:
            raise DomainError("num_subcarriers must be >= 1")
        if not self.d_min < self.d_max:
            raise DomainError("d_min must be smaller than d_max")
        if not (self.d_min <= self.link_distance < self.d_max):
            raise DomainError("link_distance must lie in [d_min, d_max)")


def path_loss_db(f: float, d: float) -> float:
    """Free-space path loss in dB at carrier frequency ``f`` and distance ``d``."""
    if f <= 0 or d <= 0:
        raise DomainError("frequency and distance must be > 0")
    return -154.06 + 20.0 * math.log10(f) + 20.0 * math.log10(d)


def received_power(p_t: float, f: float, d: float) -> float:
    """Received power in watts for transmit power ``p_t`` over distance ``d``."""
    if p_t <= 0:
        raise DomainError("transmit power must be > 0")
    return p_t * 10.0 ** (-0.1 * path_loss_db(f, d))


def noise_power(noise_figure: float, t0: float, b: float) -> float:
    """Receiver noise power over bandwidth ``b`` for a noise figure in dB."""
    if t0 <= 0 or b <= 0:
        raise DomainError("temperature and bandwidth must be > 0")
    return 10.0 ** (noise_figure / 10.0) * BOLTZMANN * t0 * b


def subcarrier_noise_variance(config: SystemConfig) -> float:
    """Per-subcarrier noise variance: total noise power over N subcarriers."""
    return noise_power(config.noise_figure, config.ref_temperature,
                       config.bandwidth) / config.num_subcarriers


def average_received_power(p_t: float, f: float, d_lo: float, d_hi: float) -> float:
    """Expected received power for a distance uniform on ``[d_lo, d_hi]``.

    Averaging the inverse-square law over a uniform distance gives
    ``p_t * 10^15.406 / f^2 / (d_hi * d_lo)``. The degenerate case
    ``d_lo == d_hi`` is allowed and equals :func:`received_power`.
    """
    if p_t <= 0 or f <= 0:
        raise DomainError("power and frequency must be > 0")
    if d_lo <= 0 or d_hi < d_lo:
        raise DomainError("need 0 < d_lo <= d_hi")
    return p_t * 10.0 ** 15.406 / f**2 / (d_hi * d_lo)


def exponential_correlation(n: int, rho: float, phase: float | None = None) -> np.ndarray:
    """Exponential correlation matrix ``[R]_{m,n} = (c rho)^(n-m)`` for n >= m.

    ``c = exp(1j*phase)`` when a phase is given, otherwise 1; the lower
    triangle is the conjugate so the result is Hermitian with unit diagonal.
    A complex phase only rotates the eigenbasis: it is a diagonal unitary
    similarity of the real-valued matrix, so spectra and traces are
    unchanged.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 <= rho < 1.0:
        raise DomainError("correlation magnitude must lie in [0, 1)")
    c = complex(np.exp(1j * phase)) if phase is not None else 1.0 + 0j
    k = np.arange(n)
    lag = k[None, :] - k[:, None]
    r = np.where(lag >= 0, (c * rho) ** np.abs(lag),
                 np.conj((c * rho) ** np.abs(lag)))
    np.fill_diagonal(r, 1.0)
    return r.astype(np.complex128)


@dataclass(frozen=True)
class ChannelStats:
    """Deterministic description of one link: mean, correlations, K-factor split.

    ``h_d`` is the training-side N_t x N_r deterministic component (may be
    None for ensemble-average analyses where its outer product is replaced
    by its expectation). ``corr_tx``/``corr_rx`` are the transmit-side and
    receive-side correlation matrices; the full covariance of the vectorized
    training-side channel is their Kronecker product (receive side left).
    """

    h_d: np.ndarray | None
    corr_tx: np.ndarray
    corr_rx: np.ndarray
    nu: float
    varsigma: float

    @property
    def n_t(self) -> int:
        return self.corr_tx.shape[0]

    @property
    def n_r(self) -> int:
        return self.corr_rx.shape[0]

    @cached_property
    def cov_training(self) -> np.ndarray:
        """Covariance of vec(H) in training orientation: corr_rx (x) corr_tx."""
        return kron(self.corr_rx, self.corr_tx)

    @cached_property
    def cov_data(self) -> np.ndarray:
        """Covariance in the data-side orientation: corr_tx (x) corr_rx."""
        return kron(self.corr_tx, self.corr_rx)

    def corr_block(self, i: int) -> np.ndarray:
        """The i-th (0-based) diagonal N_t x N_t block of ``cov_training``."""
        return self.corr_rx[i, i] * self.corr_tx


@dataclass(frozen=True)
class ChannelRealization:
    """One drawn channel H = nu*H_d + varsigma*H_r with its scaled parts."""

    h_true: np.ndarray
    h_los: np.ndarray
    h_scatter: np.ndarray


def rician_split(k_rice: float) -> tuple[float, float]:
    """(nu, varsigma) with nu^2 = K/(K+1) and varsigma^2 = 1/(K+1)."""
    if k_rice < 0:
        raise DomainError("rician_k must be >= 0")
    nu = math.sqrt(k_rice / (k_rice + 1.0))
    varsigma = math.sqrt(1.0 / (k_rice + 1.0))
    return nu, varsigma


def build_channel_stats(config: SystemConfig, h_d: np.ndarray | None = None,
                        phase: float | None = None) -> ChannelStats:
    """Assemble the per-link statistics for a scenario.

    The transmit side uses the exponential correlation model with the
    configured magnitude (and optional phase); the receive-side antennas are
    uncorrelated, so ``corr_rx`` is the identity. If ``h_d`` is given it
    must be N_t x N_r and satisfy the trace normalization.
    """
    nu, varsigma = rician_split(config.rician_k)
    corr_tx = exponential_correlation(config.num_dta, config.correlation_factor, phase)
    corr_rx = np.eye(config.num_dra, dtype=np.complex128)
    if h_d is not None:
        h_d = np.asarray(h_d, dtype=np.complex128)
        if h_d.shape != (config.num_dta, config.num_dra):
            raise DimensionMismatch(
                f"h_d shape {h_d.shape} != ({config.num_dta}, {config.num_dra})"
            )
        target = config.num_dta * config.num_dra
        tr = float(np.sum(np.abs(h_d) ** 2))
        if abs(tr - target) > 1e-9 * target:
            raise DomainError(
                f"h_d trace normalization violated: {tr:.6g} != {target}"
            )
    return ChannelStats(h_d=h_d, corr_tx=corr_tx, corr_rx=corr_rx,
                        nu=nu, varsigma=varsigma)


def draw_los(config: SystemConfig, stream: RngStream) -> np.ndarray:
    """Draw a deterministic-component matrix, normalized to Tr{H H^H} = N_t N_r."""
    g = gaussian_matrix(config.num_dta, config.num_dra, stream)
    target = config.num_dta * config.num_dra
    norm2 = float(np.sum(np.abs(g) ** 2))
    return g * math.sqrt(target / norm2)


def draw_scattered(stats: ChannelStats, stream: RngStream) -> np.ndarray:
    """Draw one training-side scattered component with the configured correlation.

    Returns ``sqrt(corr_tx) @ G @ sqrt(corr_rx).T`` with G i.i.d. CN(0,1),
    which makes the covariance of the column-stacked result exactly
    ``corr_rx (x) corr_tx``.
    """
    g = gaussian_matrix(stats.n_t, stats.n_r, stream)
    s_t = hermitian_sqrt(stats.corr_tx)
    s_r = hermitian_sqrt(stats.corr_rx)
    return s_t @ g @ s_r.T


def compose_channel(stats: ChannelStats, h_r: np.ndarray,
                    h_d: np.ndarray | None = None) -> ChannelRealization:
    """Combine deterministic and scattered parts into one realization.

    ``h_d`` overrides ``stats.h_d`` (useful when the deterministic component
    is redrawn per trial); one of the two must be present.
    """
    mean = h_d if h_d is not None else stats.h_d
    if mean is None:
        raise DimensionMismatch("no deterministic component available")
    h_r = np.asarray(h_r, dtype=np.complex128)
    mean = np.asarray(mean, dtype=np.complex128)
    if mean.shape != h_r.shape:
        raise DimensionMismatch(f"shape mismatch {mean.shape} vs {h_r.shape}")
    h_los = stats.nu * mean
    h_scatter = stats.varsigma * h_r
    return ChannelRealization(h_true=h_los + h_scatter, h_los=h_los,
                              h_scatter=h_scatter)
