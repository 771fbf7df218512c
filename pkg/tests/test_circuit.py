import itertools

import numpy as np
import pytest

from qdecay import circuit
from qdecay.circuit import GateInstance, Netlist, NetlistError, OracleError, parse_netlist
from qdecay.gates import SLOT_DURATION, DriveMode, GateKind
from qdecay.noise import NoiseKind, NoiseSpec

CORE = "qubits 5\ntoffoli 0 1 4\ncnot 0 3\ncnot 1 3\ntoffoli 3 2 4\ncnot 2 3"
AMP = NoiseKind.AMPLITUDE


def test_parse_simple():
    nl = parse_netlist("qubits 3\ncnot 0 1")
    assert nl.n_qubits == 3 and nl.gates == [GateInstance(GateKind.CNOT, (0, 1))]


def test_parse_comments_and_outputs():
    nl = parse_netlist("# header\n#! outputs sum=3 carry=4\n\nqubits 5  # width\nnot 2\n")
    assert nl.declared_outputs == {"sum": (3,), "carry": (4,)}
    assert nl.depth == 1


@pytest.mark.parametrize("text, line", [
    ("qubits 3\nxyz 0", 2),
    ("qubits 3\ncnot 0", 2),
    ("qubits 3\n\ncnot 0 3", 3),
    ("qubits 3\ntoffoli 0 0 1", 2),
    ("cnot 0 1", 1),
    ("qubits x", 1),
    ("qubits 2\nnot a", 2),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(NetlistError) as err:
        parse_netlist(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_requires_header():
    with pytest.raises(NetlistError):
        parse_netlist("# nothing\n")


def test_round_trip_text():
    nl = circuit.bundled_adder("qckt2")
    again = parse_netlist(nl.to_text(), name=nl.name)
    assert again.gates == nl.gates and again.declared_outputs == nl.declared_outputs


def test_adder_core_truth_table():
    table = circuit.truth_table(parse_netlist(CORE))
    for abc in ("".join(p) for p in itertools.product("01", repeat=3)):
        out = table[abc + "00"]
        assert (int(out[3]), int(out[4])) == circuit.full_adder_reference(abc)


def test_schedule_shapes():
    assert circuit.schedule(Netlist(3)) == []
    for name, depth in (("qckt1", 6), ("qckt2", 9)):
        sched = circuit.schedule(circuit.bundled_adder(name))
        assert len(sched) == depth
        assert sum(d for _, d in sched) == pytest.approx(depth * SLOT_DURATION)
        assert all(h.shape == (32, 32) for h, _ in sched)
    assert sum(d for _, d in circuit.schedule(circuit.bundled_adder("qckt1"))) == pytest.approx(3 * np.pi)


def test_truth_table_identity():
    table = circuit.truth_table(Netlist(2))
    assert table == {b: b for b in ("00", "01", "10", "11")}


def test_truth_table_refuses_quantum_gates():
    with pytest.raises(OracleError):
        circuit.truth_table(parse_netlist("qubits 2\nh 0"))


def test_bundled_adder_outputs_on_111():
    assert circuit.truth_table(circuit.bundled_adder("qckt1"))["11100"] == "11111"
    assert circuit.truth_table(circuit.bundled_adder("qckt2"))["11100"] == "00011"


def test_bundled_adders_use_not_cnot_toffoli_only():
    for name in ("qckt1", "qckt2"):
        nl = circuit.bundled_adder(name)
        assert {g.kind for g in nl.gates} <= {GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI}
        assert circuit.check_adder(nl) == []


def test_check_adder_reports_mismatch():
    broken = parse_netlist("#! outputs sum=3 carry=4\n" + CORE.replace("cnot 2 3", "cnot 1 3"))
    diffs = circuit.check_adder(broken)
    assert diffs and all("expected" in d for d in diffs)


def test_adder_compare_aborts_before_simulation():
    broken = parse_netlist("#! outputs sum=3 carry=4\nqubits 5\ncnot 0 3", name="broken")
    with pytest.raises(OracleError, match="broken"):
        circuit.adder_compare(circuit.bundled_adder("qckt1"), broken)


@pytest.mark.parametrize("name", ["qckt1", "qckt2"])
def test_noise_free_readout_is_one(name):
    nl = circuit.bundled_adder(name)
    run = circuit.simulate_circuit(nl, "11100", NoiseSpec(AMP, 0.0, 5), dt=5e-3)
    assert abs(run.readout_fidelity - 1) <= 1e-7
    assert run.readout_time == nl.depth
    assert run.series.times[-1] == pytest.approx(nl.depth)


def test_window_extension_keeps_readout_at_last_gate():
    nl = parse_netlist("qubits 3\ncnot 0 1")
    short = circuit.simulate_circuit(nl, "110", NoiseSpec(AMP, 0.02, 3))
    long = circuit.simulate_circuit(nl, "110", NoiseSpec(AMP, 0.02, 3), slots=3)
    assert long.readout_fidelity == pytest.approx(short.readout_fidelity, abs=1e-12)
    assert long.series.times[-1] == pytest.approx(3.0)
    assert long.series.fidelity[-1] < long.readout_fidelity


def test_same_output_state_same_decoherence():
    # Toffoli on |110> and CNOT(0,1) on |101> both drive into |111>
    noise = NoiseSpec(AMP, 0.02, 3)
    a = circuit.simulate_circuit(parse_netlist("qubits 3\ntoffoli 0 1 2"), "110", noise, slots=3)
    b = circuit.simulate_circuit(parse_netlist("qubits 3\ncnot 0 1"), "101", noise, slots=3)
    assert np.max(np.abs(a.series.fidelity - b.series.fidelity)) <= 1e-6


def test_toffoli_110_decreasing_series():
    run = circuit.simulate_circuit(parse_netlist("qubits 3\ntoffoli 0 1 2"), "110",
                                   NoiseSpec(AMP, 0.02, 3), slots=3)
    assert np.all(np.diff(run.series.fidelity) < 0)


def test_series_labels():
    run = circuit.simulate_circuit(parse_netlist("qubits 3\nh 0"), "000",
                                   NoiseSpec(NoiseKind.PHASE, 0.1, 3), DriveMode.PAPER_LITERAL)
    assert run.series.labels == {"circuit": "netlist", "input": "000", "noise": "phase",
                                 "strength": 0.1, "mode": "paper-literal"}
    assert not run.exempt


def test_paper_literal_t_marked_exempt():
    run = circuit.simulate_circuit(parse_netlist("qubits 3\nt 0"), "000",
                                   NoiseSpec(AMP, 0.02, 3), DriveMode.PAPER_LITERAL)
    assert run.exempt


def test_width_mismatch():
    with pytest.raises(ValueError):
        circuit.simulate_circuit(Netlist(3), "11", NoiseSpec(AMP, 0.02, 3))
    with pytest.raises(ValueError):
        circuit.simulate_circuit(Netlist(3), "111", NoiseSpec(AMP, 0.02, 2))


def test_adder_compare_noise_free():
    report = circuit.adder_compare(circuit.bundled_adder("qckt1"), circuit.bundled_adder("qckt2"),
                                   AMP, 0.0, dt=2e-2)
    assert report.averages["qckt1"] == pytest.approx(1.0, abs=1e-7)
    assert report.averages["qckt2"] == pytest.approx(1.0, abs=1e-7)
    assert report.improvement == pytest.approx(0.0, abs=1e-7)
    assert report.inputs[0] == "00000" and report.inputs[-1] == "11100"
