"""Dense complex linear algebra shared by the simulator.

Matrices are plain ``numpy.ndarray`` objects of complex dtype.  Qubit 0 is the
most significant tensor factor, so ``kron(a, b)`` places ``a`` on the leftmost
wire.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.linalg

MAX_QUBITS = 10
HERMITIAN_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-9


class LinalgError(ValueError):
    """Base class for contract violations in this module."""


class SizeError(LinalgError):
    pass


class NotHermitianError(LinalgError):
    pass


class NegativityError(LinalgError):
    """A matrix expected to be PSD has a clearly negative eigenvalue."""


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a square complex matrix with finite entries."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise LinalgError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinalgError("matrix has non-finite entries")
    return arr


def kron(*factors, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Tensor product of one or more matrices, leftmost factor most significant."""
    mats = [as_matrix(f) for f in factors]
    dim = int(np.prod([m.shape[0] for m in mats]))
    if dim > 2**max_qubits:
        raise SizeError(f"tensor product of dimension {dim} exceeds {max_qubits}-qubit cap")
    return reduce(np.kron, mats)


def hermitian_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def eigh(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and the matrix whose columns are the
    corresponding orthonormal eigenvectors.
    """
    m = as_matrix(m)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    # symmetrize so LAPACK sees exactly Hermitian input
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def sqrtm_psd(m, neg_tol: float = NEGATIVE_EIG_TOL) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-neg_tol, 0)`` are treated as roundoff and clamped to
    zero; anything more negative raises :class:`NegativityError`.
    """
    vals, vecs = eigh(m)
    if vals[0] < -neg_tol:
        raise NegativityError(f"matrix has eigenvalue {vals[0]:.3e} < -{neg_tol:g}")
    roots = np.sqrt(np.clip(vals, 0.0, None))
    s = (vecs * roots) @ vecs.conj().T
    return 0.5 * (s + s.conj().T)


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a Pade core)."""
    return scipy.linalg.expm(as_matrix(m))


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
