"""Seeded, parallel Monte-Carlo link simulation.

Each trial plays out one coherence block end to end: draw the desired and
interfering channels, simulate contaminated pilot reception, form MMSE
estimates and matched-filter precoders for every transmitter, then average
an inner batch of symbol and noise draws with the channels held fixed to
measure the per-antenna SINR. The desired power is the squared magnitude of
the batch-averaged matched term; everything left over is the denominator.

Reproducibility: the random stream of (sweep point, trial, role) is a pure
function of the master seed, so results are bit-identical for any worker
count. Aggregation fills preallocated per-trial arrays and reduces with
numpy's pairwise summation, keeping the reduction order fixed.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import (ChannelStats, SystemConfig, build_channel_stats,
                      compose_channel, draw_los, received_power,
                      subcarrier_noise_variance)
from .errors import EmptySamples, InvalidAxis
from .estimation import dft_pilot, mmse_estimate, simulate_pilot_rx
from .numerics import RngStream, gaussian_matrix, hermitian_sqrt, solve_hpd
from .precoding import mf_precoder
from .sinr import closed_form_rate

# Stream roles within one trial; fixed so layouts never shift.
_LOS, _SCATTER, _TRAIN_GEO, _CONTAM, _PILOT_NOISE = 0, 1, 2, 3, 4
_INTERFERER, _SYMBOLS, _DATA_NOISE = 5, 6, 7


@dataclass(frozen=True)
class TrialResult:
    """Empirical per-antenna SINRs and the per-antenna rate of one trial."""

    per_dra_sinr: np.ndarray
    rate_per_dra: float


@dataclass(frozen=True)
class SweepResult:
    """Closed-form and simulated rates along one parameter axis."""

    axis_name: str
    axis_values: tuple[float, ...]
    theoretical: tuple[float, ...]
    approximate: tuple[float, ...]
    simulated_mean: tuple[float, ...]
    stderr: tuple[float, ...]
    samples: tuple[np.ndarray, ...]


_AXES = {
    "A": ("num_interferers", int),
    "d_ab": ("link_distance", float),
    "N_t": ("num_dta", int),
    "N_r": ("num_dra", int),
    "rho": ("correlation_factor", float),
    "K_Rice": ("rician_k", float),
}


def config_for_axis(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Scenario with one swept parameter replaced."""
    if axis not in _AXES:
        raise InvalidAxis(f"axis {axis!r} not one of {sorted(_AXES)}")
    field, cast = _AXES[axis]
    return replace(config, **{field: cast(value)})


def _uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return lo + (hi - lo) * rng.random(size)


def _rician_draw(config: SystemConfig, stats: ChannelStats, s_t: np.ndarray,
                 stream: RngStream):
    """Fresh Rician realization plus its unscaled deterministic part."""
    n_t, n_r = stats.n_t, stats.n_r
    h_d = draw_los(config, stream.child(0))
    scatter = s_t @ gaussian_matrix(n_t, n_r, stream.child(1))
    return compose_channel(stats, scatter, h_d=h_d), h_d


def _interferer_link(config: SystemConfig, stats: ChannelStats,
                     s_t: np.ndarray, pilot: np.ndarray, sigma_w2: float,
                     stream: RngStream) -> tuple[float, np.ndarray]:
    """Simulate one co-channel transmitter and its precoded leakage.

    Draws the interferer's geometry, its own link's channel and the pilots
    contaminating its estimate (including the desired receiver's pilot over
    the reciprocal pair channel), forms its MMSE estimate and
    matched-filter precoder, and returns the received power at the desired
    aircraft together with the N_r x N_r leakage gain matrix. Every channel
    carries its own line-of-sight component; the estimator removes only the
    mean of the link being estimated, so the contaminating means leak into
    the estimate exactly as they would in the air.
    """
    p_t, f = config.tx_power_per_antenna, config.carrier_freq

    rng = stream.child(0).generator()
    d_to_victim = _uniform(rng, config.link_distance, config.d_max)
    d_own = _uniform(rng, config.d_min, config.d_max)
    d_others = _uniform(rng, config.d_min, config.d_max,
                        size=max(config.num_interferers - 1, 0))
    p_at_victim = received_power(p_t, f, d_to_victim)
    p_own = received_power(p_t, f, d_own)
    # The victim's pilot reaches this transmitter over the same distance.
    q_pair = p_at_victim
    q_others = [received_power(p_t, f, d) for d in d_others]

    own, h_d_own = _rician_draw(config, stats, s_t, stream.child(1))
    # Reciprocal pair channel: victim's pilot into this transmitter during
    # training; its conjugate transpose carries the data-phase leakage.
    pair, _ = _rician_draw(config, stats, s_t, stream.child(2))
    others = [_rician_draw(config, stats, s_t, stream.child(3).child(i))[0]
              for i in range(len(q_others))]

    obs = simulate_pilot_rx([own, pair] + others,
                            [p_own, q_pair] + q_others,
                            pilot, sigma_w2, stream.child(4))
    stats_own = replace(stats, h_d=h_d_own)
    h_hat = mmse_estimate(obs, stats_own, p_own, [q_pair] + q_others, sigma_w2)
    v = mf_precoder(h_hat).v
    leakage = pair.h_true.conj().T @ v
    return p_at_victim, leakage


def run_trial(config: SystemConfig, stream: RngStream, inner_batch: int = 200,
              perfect_csi: bool = False) -> TrialResult:
    """One full pilot -> estimate -> precode -> transmit trial."""
    stats = build_channel_stats(config)
    n_t, n_r = stats.n_t, stats.n_r
    s_t = hermitian_sqrt(stats.corr_tx)
    pilot = dft_pilot(n_r)
    sigma_w2 = subcarrier_noise_variance(config)
    p = received_power(config.tx_power_per_antenna, config.carrier_freq,
                       config.link_distance)

    # Desired link and its contaminated pilot observation. Every
    # contaminating aircraft transmits the same pilot over its own Rician
    # channel; the estimator knows only the desired link's mean, so the
    # contaminating means leak into the estimate.
    h_d = draw_los(config, stream.child(_LOS))
    desired = compose_channel(
        stats, s_t @ gaussian_matrix(n_t, n_r, stream.child(_SCATTER)), h_d=h_d)
    rng_geo = stream.child(_TRAIN_GEO).generator()
    train_d = _uniform(rng_geo, config.d_min, config.d_max,
                       size=config.num_interferers)
    q = [received_power(config.tx_power_per_antenna, config.carrier_freq, d)
         for d in train_d]
    contam_base = stream.child(_CONTAM)
    contams = [_rician_draw(config, stats, s_t, contam_base.child(i))[0]
               for i in range(config.num_interferers)]
    obs = simulate_pilot_rx([desired] + contams, [p] + q, pilot, sigma_w2,
                            stream.child(_PILOT_NOISE))
    stats_d = replace(stats, h_d=h_d)
    if perfect_csi:
        v0 = desired.h_true
    else:
        h_hat = mmse_estimate(obs, stats_d, p, q, sigma_w2)
        v0 = mf_precoder(h_hat).v

    # Statistical mean of the matched-filter gain given the known
    # deterministic component: its LOS power plus the trace of the
    # estimate's covariance block. This is the gain the receiving antenna
    # treats as its effective channel; deviations count as interference.
    if perfect_csi:
        mean_gain = np.sum(np.abs(desired.h_true) ** 2, axis=0)
    else:
        s2r = stats.varsigma ** 2 * stats.corr_tx
        bracket = ((sigma_w2 / p) * np.eye(n_t)
                   + (1.0 + sum(q) / p) * s2r)
        tr_phi = float(np.trace(s2r @ solve_hpd(bracket, s2r)).real)
        mean_gain = (stats.nu ** 2 * np.sum(np.abs(h_d) ** 2, axis=0)
                     + tr_phi)

    # Interfering transmitters, each precoding toward its own receiver.
    interferers = []
    base_i = stream.child(_INTERFERER)
    for a in range(config.num_interferers):
        interferers.append(_interferer_link(config, stats, s_t, pilot,
                                            sigma_w2, base_i.child(a)))

    # Data phase with fixed channels: the mean-gain term is the useful
    # signal, everything left over the batch (gain deviation, inter-antenna
    # leakage, co-channel interference, noise) is the remaining power.
    g0 = desired.h_true.conj().T @ v0
    j = inner_batch
    rng_sym = stream.child(_SYMBOLS).generator()
    x0 = (rng_sym.standard_normal((n_r, j)) + 1j * rng_sym.standard_normal((n_r, j))) / math.sqrt(2)
    y = math.sqrt(p) * (g0 @ x0)
    for p_a, g_a in interferers:
        x_a = (rng_sym.standard_normal((n_r, j))
               + 1j * rng_sym.standard_normal((n_r, j))) / math.sqrt(2)
        y += math.sqrt(p_a) * (g_a @ x_a)
    rng_noise = stream.child(_DATA_NOISE).generator()
    noise = (rng_noise.standard_normal((n_r, j))
             + 1j * rng_noise.standard_normal((n_r, j))) / math.sqrt(2)
    y += math.sqrt(sigma_w2) * noise

    residual = y - math.sqrt(p) * mean_gain[:, None] * x0
    resid_power = np.mean(np.abs(residual) ** 2, axis=1)
    sinr = p * np.abs(mean_gain) ** 2 / resid_power
    rate = float(np.mean(np.log2(1.0 + sinr)))
    return TrialResult(per_dra_sinr=sinr, rate_per_dra=rate)


def trial_stream(seed: int, point_index: int, trial_index: int) -> RngStream:
    """The stream feeding one trial; pure in (seed, point, trial)."""
    return RngStream(seed).child(point_index).child(trial_index)


def _trial_batch(config: SystemConfig, seed: int, point_index: int,
                 trial_indices: range, inner_batch: int) -> list[tuple[int, float, np.ndarray]]:
    out = []
    for t in trial_indices:
        res = run_trial(config, trial_stream(seed, point_index, t),
                        inner_batch=inner_batch)
        out.append((t, res.rate_per_dra, res.per_dra_sinr))
    return out


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, then AERO_ACM_THREADS, then one."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("AERO_ACM_THREADS")
    if env:
        return max(1, int(env))
    return 1


def simulate_point(config: SystemConfig, trials: int, seed: int,
                   point_index: int = 0, inner_batch: int = 200,
                   workers: int | None = None) -> np.ndarray:
    """Per-trial rates for one scenario; identical for any worker count."""
    rates = np.empty(trials, dtype=float)
    n_workers = resolve_workers(workers)
    if n_workers <= 1 or trials < 4:
        for t, rate, _ in _trial_batch(config, seed, point_index,
                                       range(trials), inner_batch):
            rates[t] = rate
        return rates
    chunk = max(1, math.ceil(trials / n_workers))
    spans = [range(lo, min(lo + chunk, trials))
             for lo in range(0, trials, chunk)]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        futures = [pool.submit(_trial_batch, config, seed, point_index,
                               span, inner_batch) for span in spans]
        for fut in futures:
            for t, rate, _ in fut.result():
                rates[t] = rate
    return rates


def run_sweep(config: SystemConfig, axis: str, values, trials: int,
              seed: int, inner_batch: int = 200,
              workers: int | None = None) -> SweepResult:
    """Closed-form and simulated rates along one axis.

    Every point gets its own closed-form evaluation in both modes plus
    ``trials`` simulated trials with independent, reproducible streams.
    """
    theoretical = []
    approximate = []
    sim_mean = []
    stderr = []
    samples = []
    for i, value in enumerate(values):
        cfg = config_for_axis(config, axis, value)
        theoretical.append(closed_form_rate(cfg, mode="theoretical"))
        approximate.append(closed_form_rate(cfg, mode="approximate"))
        rates = simulate_point(cfg, trials, seed, point_index=i,
                               inner_batch=inner_batch, workers=workers)
        sim_mean.append(float(np.mean(rates)))
        spread = float(np.std(rates, ddof=1)) if trials > 1 else 0.0
        stderr.append(spread / math.sqrt(trials))
        samples.append(rates)
    return SweepResult(axis_name=axis, axis_values=tuple(float(v) for v in values),
                       theoretical=tuple(theoretical),
                       approximate=tuple(approximate),
                       simulated_mean=tuple(sim_mean), stderr=tuple(stderr),
                       samples=tuple(samples))


def ccdf(samples, grid) -> np.ndarray:
    """P(sample > x) for each grid value x."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySamples("cannot form a CCDF from no samples")
    ordered = np.sort(samples)
    grid = np.asarray(grid, dtype=float)
    above = samples.size - np.searchsorted(ordered, grid, side="right")
    return above / samples.size


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis_value", "theoretical", "approximate",
                         "simulated_mean", "stderr"])
        rows = zip(result.axis_values, result.theoretical, result.approximate,
                   result.simulated_mean, result.stderr)
        for row in rows:
            writer.writerow([format(v, ".15g") for v in row])


def write_samples_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "rate"])
        for t, rate in enumerate(np.asarray(samples, dtype=float)):
            writer.writerow([t, format(rate, ".15g")])


def write_ccdf_csv(grid, probs, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rate", "prob"])
        for x, pr in zip(np.asarray(grid, float), np.asarray(probs, float)):
            writer.writerow([format(x, ".15g"), format(pr, ".15g")])
