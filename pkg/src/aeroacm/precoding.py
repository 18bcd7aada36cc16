"""Matched-filter transmit precoding and the received-signal model."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange
from .numerics import RngStream, gaussian_matrix


@dataclass(frozen=True)
class Precoder:
    """Transmit precoding matrix, one column per receive antenna stream."""

    v: np.ndarray


def mf_precoder(h_hat_training_side: np.ndarray) -> Precoder:
    """Matched-filter precoder: the training-side channel estimate itself.

    With reciprocity the data-side channel is the conjugate transpose of the
    training-side estimate, so transmitting along the estimate maximizes the
    matched gain.
    """
    h = np.asarray(h_hat_training_side, dtype=np.complex128)
    if h.ndim != 2:
        raise DimensionMismatch(f"estimate must be 2-D, got {h.shape}")
    return Precoder(v=h.copy())


def received_symbol(channels: Sequence[np.ndarray], precoders: Sequence[Precoder],
                    powers: Sequence[float], symbols: Sequence[np.ndarray],
                    sigma_w2: float, stream: RngStream) -> np.ndarray:
    """One received symbol vector at the desired aircraft.

    ``channels`` holds data-side (N_r x N_t) matrices, first the desired
    link then the interferers; each transmitter applies its own precoder to
    its own symbol vector. Returns ``sum_i sqrt(P_i) H_i V_i x_i + w``.
    """
    if not (len(channels) == len(precoders) == len(powers) == len(symbols)):
        raise DimensionMismatch("channels, precoders, powers, symbols must align")
    n_r = np.asarray(channels[0]).shape[0]
    y = np.zeros((n_r, 1), dtype=np.complex128)
    for h, pre, p, x in zip(channels, precoders, powers, symbols):
        h = np.asarray(h, dtype=np.complex128)
        x = np.asarray(x, dtype=np.complex128).reshape(-1, 1)
        if h.shape[0] != n_r:
            raise DimensionMismatch("all channels must share the receive dimension")
        if h.shape[1] != pre.v.shape[0] or pre.v.shape[1] != x.shape[0]:
            raise DimensionMismatch("channel/precoder/symbol dimensions disagree")
        y += math.sqrt(p) * (h @ pre.v @ x)
    if sigma_w2 > 0:
        y += math.sqrt(sigma_w2) * gaussian_matrix(n_r, 1, stream)
    return y


@dataclass(frozen=True)
class TermPowers:
    """Power of each received-signal component at one antenna."""

    desired_mean: float
    est_error: float
    inter_antenna: float
    interferer: float
    noise: float

    @property
    def total(self) -> float:
        return (self.desired_mean + self.est_error + self.inter_antenna
                + self.interferer + self.noise)


def decompose_terms(channels: Sequence[np.ndarray], precoders: Sequence[Precoder],
                    powers: Sequence[float], sigma_w2: float, antenna: int,
                    mean_gain: complex | None = None) -> TermPowers:
    """Split the received power at one antenna into its five components.

    Conditional on the given channels and precoders (unit-power uncorrelated
    symbols, noise variance ``sigma_w2``), the received power at the chosen
    antenna separates into: the squared mean matched gain, the fluctuation
    of the matched gain around that mean, the other streams of the desired
    transmitter, the interferers, and noise. ``mean_gain`` is the ensemble
    mean of the matched gain; when omitted the realized gain is taken as the
    mean, which zeroes the fluctuation term (the perfect-knowledge split).
    The five terms sum exactly to the conditional received power.
    """
    if not channels:
        raise DimensionMismatch("need at least the desired link")
    g0 = np.asarray(channels[0]) @ precoders[0].v
    n_r = g0.shape[0]
    if not 0 <= antenna < n_r:
        raise IndexOutOfRange(f"antenna {antenna} outside 0..{n_r - 1}")
    p0 = powers[0]
    gain = g0[antenna, antenna]
    mean = gain if mean_gain is None else mean_gain
    desired_mean = p0 * abs(mean) ** 2
    est_error = p0 * abs(gain - mean) ** 2
    inter = p0 * float(np.sum(np.abs(np.delete(g0[antenna, :], antenna)) ** 2))
    interferer = 0.0
    for h, pre, p in zip(channels[1:], precoders[1:], powers[1:]):
        row = (np.asarray(h) @ pre.v)[antenna, :]
        interferer += p * float(np.sum(np.abs(row) ** 2))
    return TermPowers(desired_mean=desired_mean, est_error=est_error,
                      inter_antenna=inter, interferer=interferer,
                      noise=sigma_w2)
