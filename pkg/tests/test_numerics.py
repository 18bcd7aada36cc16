"""Random-stream and complex-matrix helper tests."""

import numpy as np
import pytest

from aeroacm.errors import DimensionMismatch, NotHermitian, NotPSD, Singular
from aeroacm.numerics import (RngStream, gaussian_matrix, hermitian_sqrt,
                              kron, solve_hpd)


def random_hpd(n: int, stream: RngStream) -> np.ndarray:
    g = gaussian_matrix(n, n, stream)
    return g @ g.conj().T + np.eye(n)


def test_equal_streams_reproduce():
    a = gaussian_matrix(5, 3, RngStream(42, 7))
    b = gaussian_matrix(5, 3, RngStream(42, 7))
    np.testing.assert_array_equal(a, b)


def test_distinct_streams_differ():
    base = gaussian_matrix(4, 4, RngStream(42, 0))
    assert not np.array_equal(base, gaussian_matrix(4, 4, RngStream(42, 1)))
    assert not np.array_equal(base, gaussian_matrix(4, 4, RngStream(43, 0)))


def test_child_derivation_is_pure():
    s = RngStream(11, 5)
    assert s.child(3) == s.child(3)
    assert s.child(3) != s.child(4)
    assert s.child(3).master_seed == 11
    # two-level children with different paths must not collide
    ids = {s.child(i).child(j).stream_id for i in range(20) for j in range(20)}
    assert len(ids) == 400


def test_gaussian_moments():
    """Entries are circularly symmetric with unit second moment."""
    x = gaussian_matrix(400, 500, RngStream(3))
    n = x.size
    assert abs(x.mean()) < 4.0 / np.sqrt(n)
    assert abs(np.mean(np.abs(x) ** 2) - 1.0) < 0.01
    # pseudo-variance E[x^2] vanishes for circular symmetry
    assert abs(np.mean(x**2)) < 4.0 / np.sqrt(n)


def test_kron_matches_block_layout():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[0.0, 1j], [1.0, 0.0]])
    k = kron(a, b)
    assert k.shape == (4, 4)
    np.testing.assert_allclose(k[:2, :2], 1.0 * b)
    np.testing.assert_allclose(k[:2, 2:], 2.0 * b)
    np.testing.assert_allclose(k[2:, :2], 3.0 * b)


def test_kron_rejects_vectors():
    with pytest.raises(DimensionMismatch):
        kron(np.ones(3), np.eye(2))


def test_hermitian_sqrt_roundtrip():
    a = random_hpd(12, RngStream(8))
    s = hermitian_sqrt(a)
    rel = np.linalg.norm(s @ s - a) / np.linalg.norm(a)
    assert rel < 1e-8
    assert np.max(np.abs(s - s.conj().T)) < 1e-10
    assert np.min(np.linalg.eigvalsh(s)) >= 0.0


def test_hermitian_sqrt_clips_rounding_noise():
    # an eigenvalue inside the [-1e-10, 0] window counts as zero
    q, _ = np.linalg.qr(gaussian_matrix(3, 3, RngStream(9)))
    a = (q * np.array([-5e-11, 0.5, 2.0])) @ q.conj().T
    s = hermitian_sqrt(a)
    w = np.linalg.eigvalsh(s)
    assert w[0] >= 0.0
    np.testing.assert_allclose(sorted(w**2), [0.0, 0.5, 2.0], atol=1e-9)


def test_hermitian_sqrt_rejects_asymmetric():
    with pytest.raises(NotHermitian):
        hermitian_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hermitian_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD):
        hermitian_sqrt(np.diag([1.0, -0.5]))


def test_hermitian_sqrt_rejects_nonsquare():
    with pytest.raises(DimensionMismatch):
        hermitian_sqrt(np.ones((2, 3)))


def test_solve_hpd_matches_direct_solve():
    a = random_hpd(9, RngStream(14))
    b = gaussian_matrix(9, 4, RngStream(15))
    x = solve_hpd(a, b)
    np.testing.assert_allclose(a @ x, b, atol=1e-10)
    np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-10)


def test_solve_hpd_rejects_singular():
    with pytest.raises(Singular):
        solve_hpd(np.zeros((3, 3)), np.eye(3))


def test_solve_hpd_shape_checks():
    with pytest.raises(DimensionMismatch):
        solve_hpd(np.ones((2, 3)), np.eye(2))
    with pytest.raises(DimensionMismatch):
        solve_hpd(np.eye(3), np.eye(2))
