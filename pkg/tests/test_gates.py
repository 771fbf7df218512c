import numpy as np
import pytest

from qdecay import linalg
from qdecay.gates import SLOT_DURATION, DriveMode, GateKind, embed, embed_matrix, gate_unitary, \
    generator

I2 = np.eye(2)
HERMITIAN_KINDS = [GateKind.NOT, GateKind.HADAMARD, GateKind.CNOT, GateKind.TOFFOLI,
                   GateKind.FREDKIN]


def test_examples():
    np.testing.assert_array_equal(gate_unitary(GateKind.NOT), [[0, 1], [1, 0]])
    np.testing.assert_allclose(gate_unitary(GateKind.HADAMARD),
                               np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    np.testing.assert_allclose(gate_unitary(GateKind.T), np.diag([1, np.exp(1j * np.pi / 4)]))
    np.testing.assert_allclose(gate_unitary(GateKind.PHASE_S), np.diag([1, 1j]))


@pytest.mark.parametrize("kind", list(GateKind))
def test_unitary(kind):
    u = gate_unitary(kind)
    assert u.shape == (2**kind.arity,) * 2
    assert linalg.max_abs_diff(u @ u.conj().T, np.eye(u.shape[0])) <= 1e-12


def _basis_action(u):
    return {format(i, f"0{int(np.log2(len(u)))}b"): format(int(np.argmax(np.abs(u[:, i]))),
                                                          f"0{int(np.log2(len(u)))}b")
            for i in range(len(u))}


def test_controlled_gate_conventions():
    assert _basis_action(gate_unitary(GateKind.CNOT)) == {"00": "00", "01": "01", "10": "11", "11": "10"}
    toffoli = _basis_action(gate_unitary(GateKind.TOFFOLI))
    assert toffoli["110"] == "111" and toffoli["111"] == "110" and toffoli["101"] == "101"
    fredkin = _basis_action(gate_unitary(GateKind.FREDKIN))
    assert fredkin["110"] == "101" and fredkin["101"] == "110" and fredkin["011"] == "011"


def test_embed_examples():
    cnot = gate_unitary(GateKind.CNOT)
    h = gate_unitary(GateKind.HADAMARD)
    np.testing.assert_array_equal(embed(GateKind.CNOT, (1, 2), 3), np.kron(I2, cnot))
    np.testing.assert_array_equal(embed(GateKind.HADAMARD, (0,), 3), np.kron(np.kron(h, I2), I2))
    np.testing.assert_array_equal(embed(GateKind.TOFFOLI, (0, 1, 2), 3),
                                  gate_unitary(GateKind.TOFFOLI))


def _classical_apply(kind, wires, bits):
    b = [int(c) for c in bits]
    if kind is GateKind.CNOT:
        b[wires[1]] ^= b[wires[0]]
    elif kind is GateKind.TOFFOLI:
        b[wires[2]] ^= b[wires[0]] & b[wires[1]]
    elif kind is GateKind.FREDKIN and b[wires[0]]:
        b[wires[1]], b[wires[2]] = b[wires[2]], b[wires[1]]
    return "".join(map(str, b))


@pytest.mark.parametrize("kind, wires", [
    (GateKind.CNOT, (3, 0)), (GateKind.CNOT, (2, 4)), (GateKind.TOFFOLI, (4, 0, 2)),
    (GateKind.TOFFOLI, (3, 2, 4)), (GateKind.FREDKIN, (2, 4, 0)),
])
def test_embed_arbitrary_wire_order(kind, wires):
    # brute-force oracle: bit manipulation on every basis state
    u = embed(kind, wires, 5)
    for idx in range(32):
        bits = format(idx, "05b")
        out = int(_classical_apply(kind, wires, bits), 2)
        assert u[out, idx] == 1
    assert linalg.max_abs_diff(u @ u.conj().T, np.eye(32)) <= 1e-12


def test_embed_noncontiguous_single_qubit():
    x = gate_unitary(GateKind.NOT)
    np.testing.assert_array_equal(embed_matrix(x, (2,), 3), np.kron(np.eye(4), x))


@pytest.mark.parametrize("wires", [(0, 0), (0, 3), (-1, 1), (0,)])
def test_embed_rejects_bad_wires(wires):
    with pytest.raises(ValueError):
        embed(GateKind.CNOT, wires, 3)


def test_generator_examples():
    h = gate_unitary(GateKind.HADAMARD)
    for mode in DriveMode:
        np.testing.assert_array_equal(generator(GateKind.HADAMARD, mode), h)
    np.testing.assert_array_equal(generator(GateKind.T, DriveMode.PAPER_LITERAL),
                                  gate_unitary(GateKind.T))
    g = generator(GateKind.T, DriveMode.HERMITIAN_GENERATOR)
    np.testing.assert_array_equal(g, np.diag([0, -0.5]))
    got = linalg.expm(-1j * g * SLOT_DURATION)
    assert linalg.max_abs_diff(got, np.diag([1, np.exp(1j * np.pi / 4)])) <= 1e-12


@pytest.mark.parametrize("kind", list(GateKind))
def test_generator_completes_gate_up_to_phase(kind):
    g = generator(kind, DriveMode.HERMITIAN_GENERATOR)
    np.testing.assert_array_equal(g, g.conj().T)
    u = linalg.expm(-1j * g * SLOT_DURATION)
    target = gate_unitary(kind)
    phase = np.vdot(target.reshape(-1), u.reshape(-1)) / target.shape[0]
    assert abs(abs(phase) - 1) <= 1e-9
    assert linalg.max_abs_diff(u, phase * target) <= 1e-9


@pytest.mark.parametrize("kind", HERMITIAN_KINDS)
def test_hermitian_gate_slot_gives_minus_i_u(kind):
    u = gate_unitary(kind)
    assert linalg.max_abs_diff(linalg.expm(-1j * u * SLOT_DURATION), -1j * u) <= 1e-9


def test_gate_names():
    assert GateKind.from_name("TOFFOLI") is GateKind.TOFFOLI
    assert GateKind.from_name("h") is GateKind.HADAMARD
    assert GateKind.from_name("id") is GateKind.IDENTITY
    with pytest.raises(KeyError):
        GateKind.from_name("xyz")
