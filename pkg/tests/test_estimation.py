"""MMSE estimator statistics and the pilot-observation model."""

import math
from dataclasses import replace

import numpy as np
import pytest

from aeroacm.channel import (SystemConfig, build_channel_stats,
                             compose_channel, draw_los, draw_scattered)
from aeroacm.errors import (DimensionMismatch, DomainError, IndexOutOfRange)
from aeroacm.estimation import (PilotObservation, build_estimation_stats,
                                diagonal_block, dft_pilot, error_covariance,
                                estimation_covariance, mean_outer,
                                mmse_estimate, simulate_pilot_rx, theta_block,
                                unvec, vec)
from aeroacm.numerics import RngStream, kron, solve_hpd

# Small scenario used throughout: 4 transmit, 2 receive antennas and
# transparent powers (desired 1 W, two contaminators at 0.5 and 0.25 W).
SMALL = replace(SystemConfig(), num_dta=4, num_dra=2, num_interferers=2)
P, Q, SIGMA = 1.0, (0.5, 0.25), 0.1


def small_stats(seed: int = 21):
    h_d = draw_los(SMALL, RngStream(seed))
    return build_channel_stats(SMALL, h_d=h_d)


def test_vec_is_column_stacking():
    m = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(vec(m), [1, 3, 2, 4])
    np.testing.assert_array_equal(unvec(vec(m), 2, 2), m)


def test_dft_pilot_is_unitary():
    x = dft_pilot(5)
    np.testing.assert_allclose(x @ x.conj().T, np.eye(5), atol=1e-12)


def test_pilot_observation_validation():
    with pytest.raises(DomainError):
        PilotObservation(y_rx=np.zeros((4, 2)), pilot=np.ones((2, 2)))
    with pytest.raises(DimensionMismatch):
        PilotObservation(y_rx=np.zeros((4, 3)), pilot=dft_pilot(2))


def test_diagonal_block_indexing():
    m = np.arange(36).reshape(6, 6)
    np.testing.assert_array_equal(diagonal_block(m, 1, 3), m[:3, :3])
    np.testing.assert_array_equal(diagonal_block(m, 2, 3), m[3:, 3:])
    with pytest.raises(IndexOutOfRange):
        diagonal_block(m, 0, 3)
    with pytest.raises(IndexOutOfRange):
        diagonal_block(m, 3, 3)
    with pytest.raises(DimensionMismatch):
        diagonal_block(m, 1, 4)


def test_estimation_covariance_is_hermitian_psd_and_below_prior():
    stats = small_stats()
    phi = estimation_covariance(stats, P, Q, SIGMA)
    np.testing.assert_allclose(phi, phi.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(phi)) > -1e-12
    xi = error_covariance(stats, phi)
    # the estimate never carries more scattered power than the prior
    assert np.min(np.linalg.eigvalsh(xi)) > -1e-12
    with pytest.raises(DomainError):
        estimation_covariance(stats, P, Q, 0.0)
    with pytest.raises(DomainError):
        estimation_covariance(stats, P, (-1.0,), SIGMA)


def test_mean_outer_is_rank_one():
    h_d = draw_los(SMALL, RngStream(2))
    m = mean_outer(h_d)
    assert m.shape == (8, 8)
    assert np.linalg.matrix_rank(m) == 1
    np.testing.assert_allclose(np.trace(m).real,
                               float(np.sum(np.abs(h_d) ** 2)))


def test_theta_block_shape_check():
    with pytest.raises(DimensionMismatch):
        theta_block(1.0, np.eye(3), np.eye(4))


def test_simulate_pilot_rx_superposition():
    """With the noise turned off the observation is the exact signal sum."""
    stats = small_stats()
    pilot = dft_pilot(2)
    chans = [compose_channel(stats, draw_scattered(stats, RngStream(30, i)))
             for i in range(3)]
    obs = simulate_pilot_rx(chans, [P, *Q], pilot, 0.0, RngStream(31))
    expected = sum(math.sqrt(p) * ch.h_true @ pilot
                   for p, ch in zip([P, *Q], chans))
    np.testing.assert_allclose(obs.y_rx, expected, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        simulate_pilot_rx(chans, [P], pilot, 0.0, RngStream(31))
    with pytest.raises(DimensionMismatch):
        simulate_pilot_rx([], [], pilot, 0.0, RngStream(31))


def test_mmse_fast_path_equals_kron_filter():
    """The column-wise filter must agree with the stacked-covariance form."""
    stats = small_stats()
    pilot = dft_pilot(2)
    desired = compose_channel(stats, draw_scattered(stats, RngStream(40)))
    obs = simulate_pilot_rx([desired], [P], pilot, SIGMA, RngStream(41))
    got = mmse_estimate(obs, stats, P, Q, SIGMA)

    z = obs.y_rx @ obs.pilot.conj().T / math.sqrt(P) - stats.nu * stats.h_d
    s2r = stats.varsigma**2 * kron(stats.corr_rx, stats.corr_tx)
    bracket = (SIGMA / P) * np.eye(8) + (1.0 + sum(q / P for q in Q)) * s2r
    manual = stats.nu * stats.h_d + unvec(s2r @ solve_hpd(bracket, vec(z)), 4, 2)
    np.testing.assert_allclose(got, manual, atol=1e-12)


def test_mmse_requires_deterministic_component():
    stats = build_channel_stats(SMALL)
    pilot = dft_pilot(2)
    obs = PilotObservation(y_rx=np.zeros((4, 2)), pilot=pilot)
    with pytest.raises(DomainError):
        mmse_estimate(obs, stats, P, Q, SIGMA)


def test_interferer_mean_removal_identity():
    """Passing the contaminator means equals subtracting them from the air."""
    stats = small_stats()
    pilot = dft_pilot(2)
    rng = RngStream(50)
    desired = compose_channel(stats, draw_scattered(stats, rng.child(0)))
    means = [draw_los(SMALL, rng.child(10 + a)) for a in range(2)]
    contams = [
        compose_channel(stats, draw_scattered(stats, rng.child(20 + a)),
                        h_d=means[a])
        for a in range(2)
    ]
    demeaned = [
        compose_channel(stats, draw_scattered(stats, rng.child(20 + a)),
                        h_d=np.zeros((4, 2)))
        for a in range(2)
    ]
    noise = rng.child(30)
    obs_full = simulate_pilot_rx([desired, *contams], [P, *Q], pilot,
                                 SIGMA, noise)
    obs_clean = simulate_pilot_rx([desired, *demeaned], [P, *Q], pilot,
                                  SIGMA, noise)
    with_means = mmse_estimate(obs_full, stats, P, Q, SIGMA,
                               interferer_means=means)
    without = mmse_estimate(obs_clean, stats, P, Q, SIGMA)
    np.testing.assert_allclose(with_means, without, atol=1e-10)
    with pytest.raises(DimensionMismatch):
        mmse_estimate(obs_full, stats, P, Q, SIGMA, interferer_means=means[:1])


def _estimation_trials(trials: int, seed: int):
    stats = small_stats()
    pilot = dft_pilot(2)
    zero = np.zeros((4, 2))
    root = RngStream(seed)
    est = np.empty((trials, 8), dtype=np.complex128)
    true = np.empty((trials, 8), dtype=np.complex128)
    for t in range(trials):
        s = root.child(t)
        desired = compose_channel(stats, draw_scattered(stats, s.child(0)))
        contams = [compose_channel(stats, draw_scattered(stats, s.child(2 + a)),
                                   h_d=zero)
                   for a in range(2)]
        obs = simulate_pilot_rx([desired, *contams], [P, *Q], pilot,
                                SIGMA, s.child(1))
        est[t] = vec(mmse_estimate(obs, stats, P, Q, SIGMA))
        true[t] = vec(desired.h_true)
    return stats, est, true


def test_estimator_is_unbiased():
    stats, est, _ = _estimation_trials(4000, seed=60)
    target = vec(stats.nu * stats.h_d)
    se = est.std(axis=0, ddof=1) / math.sqrt(est.shape[0])
    assert np.max(np.abs(est.mean(axis=0) - target) / se) < 3.0


def test_estimate_covariance_and_error_orthogonality():
    """Sampled second moments agree with the filter's model.

    The estimate's vec-covariance must match the model covariance, and the
    estimation error must be uncorrelated with the estimate (the defining
    property of the conditional-mean filter).
    """
    trials = 20_000
    stats, est, true = _estimation_trials(trials, seed=61)
    centered = est - est.mean(axis=0)
    emp_cov = centered.T @ centered.conj() / (trials - 1)
    model_cov = estimation_covariance(stats, P, Q, SIGMA)
    rel = np.linalg.norm(emp_cov - model_cov) / np.linalg.norm(model_cov)
    assert rel < 0.05

    err = true - est
    cross = centered.T @ (err - err.mean(axis=0)).conj() / (trials - 1)
    assert np.linalg.norm(cross) < 0.05 * np.linalg.norm(model_cov)


def test_build_estimation_stats_contents():
    stats = small_stats()
    est = build_estimation_stats(stats, P, Q, SIGMA)
    assert est.rho_ratios == (0.5, 0.25)
    assert math.isclose(est.snr_ratio, SIGMA / P)
    np.testing.assert_allclose(est.m_mean, mean_outer(stats.h_d), atol=1e-14)
    for i, theta in enumerate(est.theta_blocks, start=1):
        expected = theta_block(stats.nu, diagonal_block(est.m_mean, i, 4),
                               diagonal_block(est.phi, i, 4))
        np.testing.assert_allclose(theta, expected, atol=1e-14)

    blind = build_estimation_stats(build_channel_stats(SMALL), P, Q, SIGMA)
    np.testing.assert_allclose(blind.m_mean, np.eye(8), atol=1e-14)
