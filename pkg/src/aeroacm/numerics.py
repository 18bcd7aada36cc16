"""Complex-matrix utilities and reproducible random streams.

Everything downstream (channel construction, MMSE estimation, the closed-form
SINR machinery and the Monte-Carlo engine) goes through this module for
Kronecker products, Hermitian square roots, positive-definite solves and
seeded complex Gaussian sampling. All functions are pure; random sampling is
driven by value-semantic :class:`RngStream` objects so that results are
reproducible and order-independent under parallel execution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionMismatch, NotHermitian, NotPSD, Singular

# Tolerances shared by the Hermitian/PSD checks below.
HERMITIAN_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One round of the SplitMix64 mixer (used to derive child stream ids)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    Streams are identified by ``(master_seed, stream_id)``: equal pairs yield
    bit-identical sequences, distinct ids yield statistically independent
    ones. The counter-based Philox generator underneath makes streams cheap
    to create, so simulation code derives one stream per (sweep point, trial,
    role) instead of sharing generators.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            [self.master_seed & _MASK64, self.stream_id & _MASK64]
        )
        return np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "RngStream":
        """Derive the ``index``-th sub-stream of this stream.

        The mapping is a pure function of (master_seed, stream_id, index);
        repeated calls with the same index return the same stream.
        """
        mixed = _splitmix64((self.stream_id ^ _splitmix64(index & _MASK64)) & _MASK64)
        return RngStream(self.master_seed, mixed)


def _as_complex_matrix(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return a.astype(np.complex128, copy=False)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two complex matrices."""
    a = _as_complex_matrix(a, "a")
    b = _as_complex_matrix(b, "b")
    return np.kron(a, b)


def hermitian_sqrt(a: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Computed by eigendecomposition. Eigenvalues in ``[-1e-10, 0]`` are
    treated as rounding noise and clipped to zero, anything below that
    raises :class:`NotPSD`. Input asymmetry beyond ``1e-10`` (max element
    magnitude of ``A - A^H``) raises :class:`NotHermitian`.
    """
    a = _as_complex_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got {a.shape}")
    asym = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if asym > HERMITIAN_ATOL:
        raise NotHermitian(f"max asymmetry {asym:.3e} exceeds {HERMITIAN_ATOL:.0e}")
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    if w.size and w[0] < EIGENVALUE_FLOOR:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below {EIGENVALUE_FLOOR:.0e}")
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def solve_hpd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for Hermitian positive definite ``a``.

    Uses a Cholesky factorization; failure to factor raises
    :class:`Singular`.
    """
    a = _as_complex_matrix(a, "a")
    b = np.asarray(b, dtype=np.complex128)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs rows {b.shape[0]} != matrix size {a.shape[0]}")
    a = 0.5 * (a + a.conj().T)
    try:
        factor = cho_factor(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc
    return cho_solve(factor, b, check_finite=False)


def gaussian_matrix(rows: int, cols: int, stream: RngStream) -> np.ndarray:
    """Matrix of i.i.d. circularly symmetric complex Gaussians, unit variance.

    Real and imaginary parts each have variance 1/2 so E|entry|^2 = 1.
    """
    rng = stream.generator()
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)
