"""Dense real-symmetric spectra and exact unitary evolution (hbar = 1)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrumError, SpectralError

__all__ = [
    "SpectralDecomposition",
    "eigendecompose",
    "leading_eigenvector",
    "evolve",
    "overlap",
    "basis_state",
]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order and matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if not np.array_equal(m, m.T):
        raise ValueError("matrix is not exactly symmetric")
    return m


def eigendecompose(m: np.ndarray) -> SpectralDecomposition:
    """Full eigensystem of a symmetric matrix, eigenvalues ascending."""
    m = _check_symmetric(m)
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        norm = np.abs(m).max() if m.size else 0.0
        raise SpectralError(
            f"eigh did not converge (n={m.shape[0]}, max|M|={norm:.3e}, "
            f"cond estimate={np.linalg.cond(m):.3e})"
        ) from exc
    values.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(values, vectors)


def leading_eigenvector(a: np.ndarray, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and its Perron vector with a positive global sign.

    Raises
    ------
    DegenerateSpectrumError
        If the two largest eigenvalues agree within ``tol`` (relative to
        ``max(1, |lambda_1|)``), which for non-negative matrices signals a
        disconnected graph.
    """
    a = _check_symmetric(a)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0]), np.ones(1)
    values, vectors = scipy.linalg.eigh(a, subset_by_index=[n - 2, n - 1])
    lam, second = values[1], values[0]
    if lam - second <= tol * max(1.0, abs(lam)):
        raise DegenerateSpectrumError(f"leading eigenvalue {lam:.12g} is degenerate (next {second:.12g})")
    vec = vectors[:, 1]
    if vec.sum() < 0:
        vec = -vec
    return float(lam), vec


def basis_state(n: int, i: int) -> np.ndarray:
    psi = np.zeros(n, dtype=complex)
    psi[i] = 1.0
    return psi


def evolve(d: SpectralDecomposition, psi0: np.ndarray, t: float) -> np.ndarray:
    """Return ``exp(-i H t) psi0`` using the spectral representation of ``H``."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (d.dim,):
        raise ValueError(f"state of shape {psi0.shape} does not match dimension {d.dim}")
    coeff = d.vectors.T @ psi0
    return d.vectors @ (np.exp(-1j * d.values * t) * coeff)


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """Inner product <a|b>, conjugating the left argument."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))
