"""State vectors and density matrices for n-qubit registers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qdecay import linalg

NORM_TOL = 1e-9
TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-9
MIN_EIG_TOL = -1e-8


class StateError(ValueError):
    pass


class BitstringError(StateError):
    pass


class NormalizationError(StateError):
    pass


def _n_qubits_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise StateError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise StateError(f"{amps.size} amplitudes for {self.n_qubits} qubits")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state has squared norm {norm:.12g}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = linalg.as_matrix(self.mat).copy()
        if m.shape[0] != 2**self.n_qubits:
            raise StateError(f"matrix of dim {m.shape[0]} for {self.n_qubits} qubits")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_matrix(cls, m, check: bool = True) -> "DensityMatrix":
        m = linalg.as_matrix(m)
        rho = cls(_n_qubits_for(m.shape[0]), m)
        if check:
            report = validate(rho)
            if not report.ok:
                raise StateError(f"not a valid density matrix: {report}")
        return rho

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def ket(bits: str) -> StateVector:
    """Computational basis state; ``bits`` is read big-endian, qubit 0 first."""
    if not bits or any(ch not in "01" for ch in bits):
        raise BitstringError(f"invalid bitstring {bits!r}")
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(len(bits), amps)


def product_state(per_qubit: Sequence[tuple[complex, complex]]) -> StateVector:
    """Tensor product of single-qubit states ``a|0> + b|1>``."""
    if not per_qubit:
        raise StateError("need at least one qubit")
    vecs = []
    for i, (a, b) in enumerate(per_qubit):
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"qubit {i}: |a|^2 + |b|^2 = {norm:.12g}")
        vecs.append(np.array([a, b], dtype=complex))
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.kron(amps, v)
    return StateVector(len(per_qubit), amps)


def density_from_ensemble(states: Sequence[StateVector], probs: Sequence[float]) -> DensityMatrix:
    """Mixture ``sum_i p_i |psi_i><psi_i|``."""
    if len(states) == 0 or len(states) != len(probs):
        raise StateError("states and probs must be non-empty and of equal length")
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > NORM_TOL:
        raise StateError(f"bad probability vector {p.tolist()}")
    widths = {s.n_qubits for s in states}
    if len(widths) != 1:
        raise StateError(f"states have mismatched widths {sorted(widths)}")
    mat = sum(pi * s.projector() for pi, s in zip(p, states))
    return DensityMatrix.from_matrix(mat)


def pure(state: StateVector) -> DensityMatrix:
    return density_from_ensemble([state], [1.0])


@dataclass(frozen=True)
class ValidationReport:
    trace_dev: float
    hermitian_dev: float
    min_eigenvalue: float
    ok: bool

    def __str__(self):
        status = "pass" if self.ok else "fail"
        return (f"{status}: trace dev {self.trace_dev:.3e}, hermiticity dev "
                f"{self.hermitian_dev:.3e}, min eigenvalue {self.min_eigenvalue:.3e}")


def validate(rho, trace_tol: float = TRACE_TOL, herm_tol: float = HERMITIAN_TOL,
             min_eig: float = MIN_EIG_TOL) -> ValidationReport:
    """Diagnose how far ``rho`` is from being a density matrix. Never raises."""
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    trace_dev = float(abs(np.trace(m) - 1.0))
    herm_dev = linalg.hermitian_deviation(m)
    lam = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    ok = trace_dev <= trace_tol and herm_dev <= herm_tol and lam >= min_eig
    return ValidationReport(trace_dev, herm_dev, lam, ok)
