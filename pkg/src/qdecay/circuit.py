"""Netlists, gate schedules and noisy circuit simulation.

Netlist text format::

    # comment
    qubits 5
    toffoli 0 1 4
    cnot 0 3

Wires are 0-based with qubit 0 most significant.  A comment of the form
``#! outputs sum=3 carry=4`` declares the roles of output wires; the parser
records it and otherwise treats it like any other comment.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from qdecay import engine, states
from qdecay.gates import SLOT_DURATION, DriveMode, GateKind, embed, embedded_generator, \
    is_hermitian_drive
from qdecay.metrics import FidelitySeries, fidelity_series
from qdecay.noise import NoiseKind, NoiseSpec, lindblad_ops

log = logging.getLogger(__name__)


class NetlistError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OracleError(RuntimeError):
    """A netlist failed its noiseless functional check."""


@dataclass(frozen=True)
class GateInstance:
    kind: GateKind
    wires: tuple[int, ...]

    def __str__(self):
        return " ".join([self.kind.label, *map(str, self.wires)])


@dataclass
class Netlist:
    n_qubits: int
    gates: list[GateInstance] = field(default_factory=list)
    name: str = "netlist"
    declared_outputs: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise NetlistError("register width must be positive")
        for g in self.gates:
            _check_wires(g.kind, g.wires, self.n_qubits)

    @property
    def depth(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        lines = [f"# {self.name}"]
        if self.declared_outputs:
            roles = " ".join(f"{k}={','.join(map(str, v))}" for k, v in self.declared_outputs.items())
            lines.append(f"#! outputs {roles}")
        lines.append(f"qubits {self.n_qubits}")
        lines.extend(str(g) for g in self.gates)
        return "\n".join(lines) + "\n"


def _check_wires(kind: GateKind, wires, n: int, line: int | None = None) -> None:
    if len(wires) != kind.arity:
        raise NetlistError(f"{kind.label} takes {kind.arity} wire(s), got {len(wires)}", line)
    if len(set(wires)) != len(wires):
        raise NetlistError(f"duplicate wires {list(wires)}", line)
    for w in wires:
        if not 0 <= w < n:
            raise NetlistError(f"wire {w} out of range for {n} qubits", line)


def _parse_outputs(text: str, line: int) -> dict[str, tuple[int, ...]]:
    roles = {}
    for item in text.split():
        key, _, val = item.partition("=")
        try:
            roles[key] = tuple(int(v) for v in val.split(","))
        except ValueError:
            raise NetlistError(f"bad output declaration {item!r}", line) from None
    return roles


def parse_netlist(text: str, name: str = "netlist") -> Netlist:
    n_qubits = None
    gates = []
    outputs: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        if comment.startswith("! outputs"):
            outputs = _parse_outputs(comment[len("! outputs"):], lineno)
        parts = body.split()
        if not parts:
            continue
        if n_qubits is None:
            if parts[0].lower() != "qubits" or len(parts) != 2:
                raise NetlistError("expected 'qubits N' as first statement", lineno)
            try:
                n_qubits = int(parts[1])
            except ValueError:
                raise NetlistError(f"bad qubit count {parts[1]!r}", lineno) from None
            if n_qubits < 1:
                raise NetlistError("qubit count must be positive", lineno)
            continue
        try:
            kind = GateKind.from_name(parts[0])
        except KeyError:
            raise NetlistError(f"unknown gate {parts[0]!r}", lineno) from None
        try:
            wires = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise NetlistError(f"bad wire index in {body.strip()!r}", lineno) from None
        _check_wires(kind, wires, n_qubits, lineno)
        gates.append(GateInstance(kind, wires))
    if n_qubits is None:
        raise NetlistError("missing 'qubits N' line")
    for role, wires in outputs.items():
        if any(not 0 <= w < n_qubits for w in wires):
            raise NetlistError(f"declared {role} wire out of range")
    return Netlist(n_qubits, gates, name, outputs)


def load_netlist(path) -> Netlist:
    path = Path(path)
    return parse_netlist(path.read_text(encoding="utf-8"), name=path.stem)


def bundled_adder(name: str) -> Netlist:
    """Load ``qckt1`` or ``qckt2`` from the package data."""
    text = resources.files("qdecay").joinpath("adders", f"{name}.net").read_text(encoding="utf-8")
    return parse_netlist(text, name=name)


def schedule(netlist: Netlist, mode: DriveMode = DriveMode.HERMITIAN_GENERATOR):
    """One ``(H, pi/2)`` segment per gate, strictly sequential."""
    return [(embedded_generator(g.kind, g.wires, netlist.n_qubits, mode), SLOT_DURATION)
            for g in netlist.gates]


def truth_table(netlist: Netlist) -> dict[str, str]:
    """Basis-input to basis-output map under exact gate application."""
    bad = sorted({g.kind.label for g in netlist.gates if not g.kind.classical})
    if bad:
        raise OracleError(f"truth table undefined for non-classical gates: {', '.join(bad)}")
    n = netlist.n_qubits
    u = np.eye(2**n, dtype=complex)
    for g in netlist.gates:
        u = embed(g.kind, g.wires, n) @ u
    table = {}
    for idx in range(2**n):
        col = u[:, idx]
        out = int(np.argmax(np.abs(col)))
        if abs(abs(col[out]) - 1.0) > 1e-12:
            raise OracleError(f"input {idx:0{n}b} does not map to a basis state")
        table[format(idx, f"0{n}b")] = format(out, f"0{n}b")
    return table


@dataclass
class CircuitRun:
    netlist: Netlist
    input_bits: str
    noise: NoiseSpec
    mode: DriveMode
    trajectory: engine.Trajectory
    target: engine.Trajectory
    series: FidelitySeries
    readout_fidelity: float
    readout_time: float  # in gate slots
    exempt: bool = False  # non-Hermitian drive; invariants not enforced
    diagnostics: engine.InvariantReport | None = None


def _input_state(bits, n: int) -> states.DensityMatrix:
    if isinstance(bits, states.DensityMatrix):
        rho = bits
    elif isinstance(bits, states.StateVector):
        rho = states.pure(bits)
    else:
        rho = states.pure(states.ket(bits))
    if rho.n_qubits != n:
        raise ValueError(f"input has {rho.n_qubits} qubits, register has {n}")
    return rho


def simulate_circuit(netlist: Netlist, input_state, noise: NoiseSpec,
                     mode: DriveMode = DriveMode.HERMITIAN_GENERATOR,
                     dt: float = engine.DEFAULT_DT, slots: int | None = None,
                     sample_every: int = engine.DEFAULT_SAMPLE_EVERY) -> CircuitRun:
    """Noisy and noiseless runs over the gate schedule, noise on throughout.

    ``slots`` extends the window past the last gate with idle (H = 0) time;
    the readout still happens at the end of the last gate.
    """
    n = netlist.n_qubits
    if noise.n_qubits != n:
        raise ValueError(f"noise spec covers {noise.n_qubits} qubits, register has {n}")
    rho0 = _input_state(input_state, n)
    sched = schedule(netlist, mode)
    if slots is not None and slots > netlist.depth:
        # one idle segment per slot keeps grids identical across circuits of different depth
        idle = np.zeros((2**n, 2**n), dtype=complex)
        sched.extend((idle, SLOT_DURATION) for _ in range(slots - netlist.depth))
    exempt = not all(is_hermitian_drive(g.kind, mode) for g in netlist.gates)
    problem = engine.EvolutionProblem(rho0, sched, lindblad_ops(noise), dt=dt,
                                      sample_every=sample_every, check_invariants=not exempt)
    noisy = engine.evolve(problem)
    target = engine.evolve_noiseless(rho0, sched, dt=dt, sample_every=sample_every)
    label = input_state if isinstance(input_state, str) else "custom"
    series = fidelity_series(noisy, target, {
        "circuit": netlist.name, "input": label, "noise": noise.kind.value,
        "strength": noise.strength, "mode": mode.value})
    series.times = series.times / SLOT_DURATION
    readout_idx = noisy.boundaries[netlist.depth - 1] if netlist.depth else 0
    return CircuitRun(netlist, label, noise, mode, noisy, target, series,
                      series.at(readout_idx), float(netlist.depth), exempt,
                      engine.invariant_report(noisy))


def full_adder_reference(bits: str) -> tuple[int, int]:
    a, b, c = (int(ch) for ch in bits)
    return a ^ b ^ c, (a & b) | (a & c) | (b & c)


def adder_wires(netlist: Netlist) -> tuple[int, int]:
    out = netlist.declared_outputs
    if "sum" not in out or "carry" not in out:
        raise OracleError(f"{netlist.name}: sum/carry wires not declared")
    return out["sum"][0], out["carry"][0]


def check_adder(netlist: Netlist) -> list[str]:
    """Compare sum/carry wires with a classical full adder; returns mismatch lines."""
    if netlist.n_qubits != 5:
        return [f"{netlist.name}: expected 5 wires, found {netlist.n_qubits}"]
    sum_w, carry_w = adder_wires(netlist)
    table = truth_table(netlist)
    diffs = []
    for abc in ("".join(p) for p in itertools.product("01", repeat=3)):
        out = table[abc + "00"]
        want = full_adder_reference(abc)
        got = (int(out[sum_w]), int(out[carry_w]))
        if got != want:
            diffs.append(f"{netlist.name}: abc={abc} -> {out}; sum,carry={got}, expected {want}")
    return diffs


@dataclass
class AdderComparison:
    names: tuple[str, str]
    inputs: list[str]
    fidelities: dict[str, list[float]]
    averages: dict[str, float]
    improvement: float  # relative gain of the first circuit over the second
    diagnostics: dict[str, list[engine.InvariantReport]] = field(default_factory=dict)


def _readout(args) -> tuple[float, engine.InvariantReport]:
    netlist, bits, noise, mode, dt = args
    run = simulate_circuit(netlist, bits, noise, mode, dt)
    return run.readout_fidelity, run.diagnostics


def adder_compare(netlist_a: Netlist, netlist_b: Netlist, noise_kind: NoiseKind = NoiseKind.AMPLITUDE,
                  strength: float = 0.02, mode: DriveMode = DriveMode.HERMITIAN_GENERATOR,
                  dt: float = engine.DEFAULT_DT, workers: int = 1) -> AdderComparison:
    """Average readout fidelity of two adders over all 8 classical inputs."""
    diffs = check_adder(netlist_a) + check_adder(netlist_b)
    if diffs:
        raise OracleError("\n".join(diffs))
    inputs = ["".join(p) + "00" for p in itertools.product("01", repeat=3)]
    jobs = [(nl, bits, NoiseSpec(noise_kind, strength, nl.n_qubits), mode, dt)
            for nl in (netlist_a, netlist_b) for bits in inputs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_readout, jobs))
    else:
        results = [_readout(job) for job in jobs]
    names = (netlist_a.name, netlist_b.name)
    fids = {names[0]: [f for f, _ in results[:8]], names[1]: [f for f, _ in results[8:]]}
    diags = {names[0]: [d for _, d in results[:8]], names[1]: [d for _, d in results[8:]]}
    avgs = {k: float(np.mean(v)) for k, v in fids.items()}
    improvement = (avgs[names[0]] - avgs[names[1]]) / avgs[names[1]]
    return AdderComparison(names, inputs, fids, avgs, improvement, diags)
