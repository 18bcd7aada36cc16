"""MMSE channel estimation under worst-case pilot contamination.

All interfering links reuse the desired link's pilot (the worst case), so
the estimate is biased toward the contaminators' channels. The estimator
operates on the pilot-decorrelated observation ``Y X^H / sqrt(P)`` with all
known deterministic components removed, leaving a zero-mean Gaussian whose
covariance is the bracket

    B = (sigma_w^2 / P) I + varsigma^2 R + sum_a (P_a / P) varsigma^2 R,

and the MMSE filter is ``varsigma^2 R B^{-1}``. The estimate covariance
``Phi``, the error covariance ``Xi = varsigma^2 R - Phi`` and the per-antenna
blocks derived from them feed the closed-form SINR module.

Block convention: the N_t*N_r x N_t*N_r matrices are partitioned into an
N_r x N_r grid of N_t x N_t blocks, matching the column stacking of the
training-side N_t x N_r channel matrix (entries grouped by receive antenna).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization, ChannelStats
from .errors import DimensionMismatch, DomainError, IndexOutOfRange
from .numerics import RngStream, gaussian_matrix, solve_hpd


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization (Fortran order), returns a 1-D array."""
    return np.asarray(m).ravel(order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape((rows, cols), order="F")


def dft_pilot(n: int) -> np.ndarray:
    """Unitary DFT matrix, the default pilot block (satisfies X X^H = I)."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / math.sqrt(n)


@dataclass(frozen=True)
class PilotObservation:
    """Received pilot block plus the pilot matrix that produced it."""

    y_rx: np.ndarray
    pilot: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.pilot)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise DimensionMismatch(f"pilot must be square, got {p.shape}")
        gram = p @ p.conj().T
        if np.max(np.abs(gram - np.eye(p.shape[0]))) > 1e-12:
            raise DomainError("pilot matrix must be unitary (X X^H = I)")
        if np.asarray(self.y_rx).shape[1] != p.shape[0]:
            raise DimensionMismatch("observation columns must match pilot size")


@dataclass(frozen=True)
class EstimationStats:
    """Second-order matrices of the MMSE estimate for one link.

    ``phi`` is the estimate covariance, ``xi`` the error covariance (both
    N_t*N_r square, training orientation), ``m_mean`` the outer product of
    the vectorized deterministic component (or its ensemble expectation, the
    identity, when no explicit component is attached). ``theta_blocks`` and
    ``omega_blocks`` are the per-receive-antenna N_t x N_t blocks used by
    the closed-form SINR terms. ``rho_ratios`` are the contaminator-to-pilot
    training power ratios and ``snr_ratio`` is sigma_w^2 / P.
    """

    phi: np.ndarray
    xi: np.ndarray
    m_mean: np.ndarray
    theta_blocks: tuple[np.ndarray, ...]
    omega_blocks: tuple[np.ndarray, ...]
    rho_ratios: tuple[float, ...]
    snr_ratio: float


def _power_ratios(p_desired: float, p_interf: Sequence[float]) -> list[float]:
    if p_desired <= 0:
        raise DomainError("desired power must be > 0")
    ratios = [float(p) / p_desired for p in p_interf]
    if any(r < 0 for r in ratios):
        raise DomainError("interferer powers must be >= 0")
    return ratios


def estimation_covariance(stats: ChannelStats, p_desired: float,
                          p_interf: Sequence[float], sigma_w2: float) -> np.ndarray:
    """Covariance ``Phi`` of the vectorized MMSE estimate.

    ``Phi = s2R (sigma_w^2/P I + s2R + sum_a (P_a/P) s2R)^{-1} s2R`` with
    ``s2R = varsigma^2 * cov_training``.
    """
    if sigma_w2 <= 0:
        raise DomainError("noise variance must be > 0")
    ratios = _power_ratios(p_desired, p_interf)
    s2r = stats.varsigma**2 * stats.cov_training
    bracket = (sigma_w2 / p_desired) * np.eye(s2r.shape[0]) + (1.0 + sum(ratios)) * s2r
    phi = s2r @ solve_hpd(bracket, s2r)
    return 0.5 * (phi + phi.conj().T)


def error_covariance(stats: ChannelStats, phi: np.ndarray) -> np.ndarray:
    """Estimation-error covariance ``Xi = varsigma^2 R - Phi``, hermitized."""
    xi = stats.varsigma**2 * stats.cov_training - np.asarray(phi)
    return 0.5 * (xi + xi.conj().T)


def mean_outer(h_d: np.ndarray) -> np.ndarray:
    """Outer product of the vectorized deterministic component (rank <= 1)."""
    v = vec(h_d)
    return np.outer(v, v.conj())


def diagonal_block(m: np.ndarray, i: int, n_t: int) -> np.ndarray:
    """The (i, i)-th N_t x N_t diagonal sub-block, 1-based index.

    Blocks follow the column-stacked training orientation: block i covers
    rows and columns ``(i-1)*n_t .. i*n_t``.
    """
    m = np.asarray(m)
    if m.shape[0] != m.shape[1] or m.shape[0] % n_t != 0:
        raise DimensionMismatch(f"matrix {m.shape} is not square with {n_t}-sized blocks")
    n_r = m.shape[0] // n_t
    if not 1 <= i <= n_r:
        raise IndexOutOfRange(f"block index {i} outside 1..{n_r}")
    sl = slice((i - 1) * n_t, i * n_t)
    return m[sl, sl].copy()


def theta_block(nu: float, m_block: np.ndarray, phi_block: np.ndarray) -> np.ndarray:
    """Combined second moment block: nu^2 * M_block + Phi_block."""
    m_block = np.asarray(m_block)
    phi_block = np.asarray(phi_block)
    if m_block.shape != phi_block.shape:
        raise DimensionMismatch(f"{m_block.shape} vs {phi_block.shape}")
    return nu**2 * m_block + phi_block


def omega_block(stats: ChannelStats, r_block: np.ndarray, p_desired: float,
                p_interf: Sequence[float], sigma_w2: float,
                consistent_sigma: bool = False) -> np.ndarray:
    """Interference-coupling block used by the residual self/cross terms.

    ``Omega = s2 r (sigma_w^2/P I + r + s * s2 r)^{-1}`` where ``r`` is the
    given correlation block, ``s2 = varsigma^2`` and ``s`` the summed
    training power ratios. The middle term is the bare correlation block;
    ``consistent_sigma=True`` replaces it by ``s2 * r`` so that all three
    summands carry the same scattered-power scaling.
    """
    ratios = _power_ratios(p_desired, p_interf)
    r_block = np.asarray(r_block, dtype=np.complex128)
    s2 = stats.varsigma**2
    middle = s2 * r_block if consistent_sigma else r_block
    bracket = ((sigma_w2 / p_desired) * np.eye(r_block.shape[0])
               + middle + sum(ratios) * s2 * r_block)
    # Omega = s2 r @ bracket^{-1}; bracket and r are Hermitian, so take the
    # conjugate transpose of the left-sided solve.
    omega = solve_hpd(bracket, s2 * r_block).conj().T
    return omega


def build_estimation_stats(stats: ChannelStats, p_desired: float,
                           p_interf: Sequence[float], sigma_w2: float,
                           consistent_sigma: bool = False) -> EstimationStats:
    """Assemble every derived matrix the SINR closed form needs.

    When ``stats.h_d`` is None the deterministic outer product is replaced
    by its ensemble expectation over normalized isotropic draws, which is
    the identity; this is the default for ensemble-average (closed-form)
    analyses.
    """
    ratios = _power_ratios(p_desired, p_interf)
    n_t, n_r = stats.n_t, stats.n_r
    phi = estimation_covariance(stats, p_desired, p_interf, sigma_w2)
    xi = error_covariance(stats, phi)
    if stats.h_d is not None:
        m_mean = mean_outer(stats.h_d)
    else:
        m_mean = np.eye(n_t * n_r, dtype=np.complex128)
    thetas = []
    omegas = []
    for i in range(1, n_r + 1):
        m_b = diagonal_block(m_mean, i, n_t)
        phi_b = diagonal_block(phi, i, n_t)
        thetas.append(theta_block(stats.nu, m_b, phi_b))
        omegas.append(omega_block(stats, stats.corr_block(i - 1), p_desired,
                                  p_interf, sigma_w2, consistent_sigma))
    return EstimationStats(
        phi=phi, xi=xi, m_mean=m_mean,
        theta_blocks=tuple(thetas), omega_blocks=tuple(omegas),
        rho_ratios=tuple(ratios), snr_ratio=sigma_w2 / p_desired,
    )


def simulate_pilot_rx(true_channels: Sequence[ChannelRealization],
                      powers: Sequence[float], pilot: np.ndarray,
                      sigma_w2: float, stream: RngStream) -> PilotObservation:
    """Received pilot block under worst-case pilot reuse.

    The first channel/power pair is the desired link; every other entry is a
    contaminator transmitting the same pilot. ``Y = sum_i sqrt(P_i) H_i X + W``
    with W i.i.d. CN(0, sigma_w2).
    """
    if len(true_channels) != len(powers):
        raise DimensionMismatch("channels and powers must have equal length")
    if not true_channels:
        raise DimensionMismatch("need at least the desired channel")
    pilot = np.asarray(pilot, dtype=np.complex128)
    shape = np.asarray(true_channels[0].h_true).shape
    y = np.zeros((shape[0], pilot.shape[1]), dtype=np.complex128)
    for ch, p in zip(true_channels, powers):
        h = np.asarray(ch.h_true)
        if h.shape != shape:
            raise DimensionMismatch(f"channel shape {h.shape} != {shape}")
        y += math.sqrt(p) * (h @ pilot)
    if sigma_w2 > 0:
        y += math.sqrt(sigma_w2) * gaussian_matrix(*y.shape, stream)
    return PilotObservation(y_rx=y, pilot=pilot)


def mmse_estimate(obs: PilotObservation, stats: ChannelStats, p_desired: float,
                  p_interf: Sequence[float], sigma_w2: float,
                  interferer_means: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """MMSE estimate of the desired training-side channel.

    The observation is pilot-decorrelated, every known deterministic
    component is removed (the desired mean always; contaminator means when
    supplied via ``interferer_means``, scaled by their power ratios), the
    MMSE filter is applied, and the desired mean is added back. Removing the
    contaminator means keeps the estimate unbiased with covariance exactly
    ``Phi``; without that knowledge the contaminators' deterministic parts
    would leak into the estimate.
    """
    ratios = _power_ratios(p_desired, p_interf)
    if stats.h_d is None:
        raise DomainError("stats.h_d is required to form the estimate")
    z = obs.y_rx @ obs.pilot.conj().T / math.sqrt(p_desired)
    z = z - stats.nu * stats.h_d
    if interferer_means is not None:
        if len(interferer_means) != len(ratios):
            raise DimensionMismatch("one mean per interferer power required")
        for ratio, mean in zip(ratios, interferer_means):
            z = z - math.sqrt(ratio) * stats.nu * np.asarray(mean)
    n_t, n_r = stats.n_t, stats.n_r
    if z.shape != (n_t, n_r):
        raise DimensionMismatch(f"observation shape {z.shape} != ({n_t}, {n_r})")
    s2 = stats.varsigma**2
    if np.max(np.abs(stats.corr_rx - np.eye(n_r))) < 1e-14:
        # Uncorrelated receive side: the filter acts column-wise with the
        # same N_t x N_t bracket, no need to form the Kronecker covariance.
        s2r = s2 * stats.corr_tx
        bracket = (sigma_w2 / p_desired) * np.eye(n_t) + (1.0 + sum(ratios)) * s2r
        filtered = s2r @ solve_hpd(bracket, z)
    else:
        s2r = s2 * stats.cov_training
        bracket = (sigma_w2 / p_desired) * np.eye(n_t * n_r) + (1.0 + sum(ratios)) * s2r
        filtered = unvec(s2r @ solve_hpd(bracket, vec(z)), n_t, n_r)
    return stats.nu * stats.h_d + filtered
