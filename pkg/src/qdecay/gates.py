"""Gate unitaries, register embedding and the drive generators used as H.

A gate slot lasts ``SLOT_DURATION = pi/2`` time units (hbar = 1).  In
``HERMITIAN_GENERATOR`` mode every generator ``G`` satisfies
``expm(-1j * G * pi/2) == U`` up to a global phase, so a slot of constant
drive implements the gate exactly.  ``PAPER_LITERAL`` mode uses the gate
unitary itself as the Hamiltonian, which is non-Hermitian for S and T.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

SLOT_DURATION = np.pi / 2


class GateKind(enum.Enum):
    NOT = ("not", 1)
    HADAMARD = ("h", 1)
    CNOT = ("cnot", 2)
    PHASE_S = ("s", 1)
    T = ("t", 1)
    TOFFOLI = ("toffoli", 3)
    FREDKIN = ("fredkin", 3)
    IDENTITY = ("id", 1)

    def __init__(self, label: str, arity: int):
        self.label = label
        self.arity = arity

    @classmethod
    def from_name(cls, name: str) -> "GateKind":
        key = name.strip().lower()
        for kind in cls:
            if key in (kind.label, kind.name.lower()):
                return kind
        raise KeyError(f"unknown gate {name!r}")

    @property
    def classical(self) -> bool:
        """True for gates that permute computational basis states."""
        return self in _CLASSICAL


class DriveMode(enum.Enum):
    HERMITIAN_GENERATOR = "hermitian"
    PAPER_LITERAL = "paper-literal"


_CLASSICAL = {GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI, GateKind.FREDKIN, GateKind.IDENTITY}
_HERMITIAN_GATES = {GateKind.NOT, GateKind.HADAMARD, GateKind.CNOT, GateKind.TOFFOLI,
                    GateKind.FREDKIN, GateKind.IDENTITY}


def _permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    m = np.zeros((len(perm), len(perm)), dtype=complex)
    for src, dst in enumerate(perm):
        m[dst, src] = 1.0
    return m


def _unitaries() -> dict[GateKind, np.ndarray]:
    s2 = 1 / np.sqrt(2)
    toffoli = list(range(8))
    toffoli[6], toffoli[7] = 7, 6
    fredkin = list(range(8))
    fredkin[5], fredkin[6] = 6, 5
    return {
        GateKind.NOT: np.array([[0, 1], [1, 0]], dtype=complex),
        GateKind.HADAMARD: np.array([[s2, s2], [s2, -s2]], dtype=complex),
        GateKind.CNOT: _permutation_matrix([0, 1, 3, 2]),
        GateKind.PHASE_S: np.diag([1, 1j]).astype(complex),
        GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
        GateKind.TOFFOLI: _permutation_matrix(toffoli),
        GateKind.FREDKIN: _permutation_matrix(fredkin),
        GateKind.IDENTITY: np.eye(2, dtype=complex),
    }


_UNITARY = _unitaries()


def gate_unitary(kind: GateKind) -> np.ndarray:
    """Unitary of ``kind``; controls sit on the more significant wires."""
    return _UNITARY[kind].copy()


def generator(kind: GateKind, mode: DriveMode = DriveMode.HERMITIAN_GENERATOR) -> np.ndarray:
    if mode is DriveMode.PAPER_LITERAL or kind in _HERMITIAN_GATES:
        if kind is GateKind.IDENTITY and mode is DriveMode.HERMITIAN_GENERATOR:
            return np.zeros((2, 2), dtype=complex)
        return gate_unitary(kind)
    if kind is GateKind.PHASE_S:
        return np.diag([0.0, -1.0]).astype(complex)
    if kind is GateKind.T:
        return np.diag([0.0, -0.5]).astype(complex)
    raise ValueError(f"no generator for {kind}")


def is_hermitian_drive(kind: GateKind, mode: DriveMode) -> bool:
    return mode is DriveMode.HERMITIAN_GENERATOR or kind in _HERMITIAN_GATES


def embed_matrix(op: np.ndarray, wires: Sequence[int], n: int) -> np.ndarray:
    """Lift a k-qubit operator acting on ``wires`` (in order) to an n-qubit register."""
    wires = tuple(int(w) for w in wires)
    k = len(wires)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {op.shape} does not act on {k} wires")
    if len(set(wires)) != k:
        raise ValueError(f"duplicate wires {wires}")
    if any(w < 0 or w >= n for w in wires):
        raise ValueError(f"wires {wires} out of range for {n} qubits")
    if wires == tuple(range(wires[0], wires[0] + k)):
        # contiguous block: plain identity padding
        left = np.eye(2 ** wires[0], dtype=complex)
        right = np.eye(2 ** (n - wires[0] - k), dtype=complex)
        return np.kron(np.kron(left, op), right)
    # general case: contract op into the output legs of the identity
    full = np.eye(2**n, dtype=complex).reshape([2] * (2 * n))
    op_t = op.reshape([2] * (2 * k))
    out = np.tensordot(op_t, full, axes=(list(range(k, 2 * k)), list(wires)))
    out = np.moveaxis(out, list(range(k)), list(wires))
    return out.reshape(2**n, 2**n)


def embed(kind: GateKind, wires: Sequence[int], n: int) -> np.ndarray:
    if len(wires) != kind.arity:
        raise ValueError(f"{kind.label} takes {kind.arity} wire(s), got {len(wires)}")
    return embed_matrix(gate_unitary(kind), wires, n)


def embedded_generator(kind: GateKind, wires: Sequence[int], n: int,
                       mode: DriveMode = DriveMode.HERMITIAN_GENERATOR) -> np.ndarray:
    if len(wires) != kind.arity:
        raise ValueError(f"{kind.label} takes {kind.arity} wire(s), got {len(wires)}")
    return embed_matrix(generator(kind, mode), wires, n)
