"""Lindblad operators for amplitude and phase damping, plus a Kraus oracle.

The master equation used throughout has the form

    drho/dt = -i[H, rho] + sum_j (2 L rho L^+ - L^+L rho - rho L^+L)

so amplitude damping with rate gamma empties |1> as exp(-2 gamma t) and
phase damping with strength lam kills coherences as exp(-4 lam t).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from qdecay.gates import embed_matrix


class NoiseKind(enum.Enum):
    AMPLITUDE = "amp"
    PHASE = "phase"
    NONE = "none"

    @classmethod
    def parse(cls, text: str) -> "NoiseKind":
        key = text.strip().lower()
        aliases = {"amp": cls.AMPLITUDE, "amplitude": cls.AMPLITUDE,
                   "phase": cls.PHASE, "none": cls.NONE}
        if key not in aliases:
            raise ValueError(f"unknown noise kind {text!r}")
        return aliases[key]


LOWERING = np.array([[0, 1], [0, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    strength: float
    n_qubits: int

    def __post_init__(self):
        if not np.isfinite(self.strength) or self.strength < 0:
            raise ValueError(f"noise strength must be a nonnegative number, got {self.strength}")
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")

    @classmethod
    def none(cls, n_qubits: int) -> "NoiseSpec":
        return cls(NoiseKind.NONE, 0.0, n_qubits)


def lindblad_ops(spec: NoiseSpec) -> list[np.ndarray]:
    """One operator per qubit: sqrt(strength) * M on that wire, identity elsewhere."""
    if spec.kind is NoiseKind.NONE:
        return []
    single = LOWERING if spec.kind is NoiseKind.AMPLITUDE else PAULI_Z
    local = np.sqrt(spec.strength) * single
    return [embed_matrix(local, (q,), spec.n_qubits) for q in range(spec.n_qubits)]


def kraus_amplitude_step(gamma: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair reproducing ``dt`` of single-qubit amplitude damping."""
    if gamma < 0 or dt <= 0:
        raise ValueError("need gamma >= 0 and dt > 0")
    p = -np.expm1(-2.0 * gamma * dt)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return k0, k1


def apply_kraus(kraus, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)
