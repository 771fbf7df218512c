"""Command-line experiment runner.

    qdecay single-gate --gate all --input 000 --noise amp --gamma 0.02 --out results/
    qdecay sweep --gate toffoli --input 110 --noise amp --gamma 0.02 --gamma 0.1 --gamma 0.2
    qdecay circuit --netlist qckt1 --input 11100
    qdecay adder-compare --gamma 0.02

Every CSV starts with ``#`` comment lines echoing the resolved configuration,
followed by ``time,fidelity[,fidelity_2,...]`` rows.  Time is in gate slots.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from qdecay import __version__, circuit, engine, states
from qdecay.circuit import GateInstance, Netlist, OracleError
from qdecay.gates import DriveMode, GateKind
from qdecay.linalg import NegativityError
from qdecay.noise import NoiseKind, NoiseSpec

log = logging.getLogger("qdecay")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ORACLE = 0, 1, 2, 3

SINGLE_GATE_QUBITS = 3
SINGLE_GATE_WIRES = {1: (0,), 2: (0, 1), 3: (0, 1, 2)}
ALL_GATES = ["cnot", "h", "toffoli", "fredkin", "s", "t"]
REPEATABLE = {"gamma", "lambda", "netlist", "gate"}
DEFAULT_STRENGTH = 0.02


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    gates: list[str] = field(default_factory=lambda: ["all"])
    netlists: list[str] = field(default_factory=list)
    input: str = ""
    noise: str = "amp"
    gammas: list[float] | None = None  # None means DEFAULT_STRENGTH
    lambdas: list[float] | None = None
    mode: str = "hermitian"
    dt: float = engine.DEFAULT_DT
    sample_every: int = engine.DEFAULT_SAMPLE_EVERY
    slots: int | None = None
    out: str = "results"
    jobs: int = 1

    @property
    def noise_kind(self) -> NoiseKind:
        return NoiseKind.parse(self.noise)

    @property
    def drive_mode(self) -> DriveMode:
        return DriveMode(self.mode)

    @property
    def strengths(self) -> list[float]:
        kind = self.noise_kind
        if kind is NoiseKind.AMPLITUDE:
            return self.gammas if self.gammas is not None else [DEFAULT_STRENGTH]
        if kind is NoiseKind.PHASE:
            return self.lambdas if self.lambdas is not None else [DEFAULT_STRENGTH]
        return [0.0]

    def metadata(self) -> list[str]:
        lines = [f"qdecay {__version__}"]
        lines += [f"{k}: {v}" for k, v in asdict(self).items()]
        lines.append("time unit: gate slot (pi/2 internal time units, hbar = 1)")
        return lines


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat 'key = value' file; command-line flags win")
    p.add_argument("--input", help="bitstring (qubit 0 first) or 'a,b' amplitudes applied to every qubit")
    p.add_argument("--noise", choices=["amp", "phase", "none"])
    p.add_argument("--gamma", type=float, action="append", help="amplitude-damping rate (repeatable)")
    p.add_argument("--lambda", dest="lambda_", type=float, action="append",
                   help="phase-damping strength (repeatable)")
    p.add_argument("--dt", type=float)
    p.add_argument("--sample-every", type=int)
    p.add_argument("--slots", type=int, help="time window in gate slots")
    p.add_argument("--mode", choices=["hermitian", "paper-literal"])
    p.add_argument("--paper-literal", action="store_true", help="shorthand for --mode paper-literal")
    p.add_argument("--out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdecay", description="Noisy gate and circuit fidelity experiments.")
    parser.add_argument("--version", action="version", version=f"qdecay {__version__}")
    sub = parser.add_subparsers(dest="experiment")
    for name, help_text in [("single-gate", "fidelity vs time for single gates on 3 qubits"),
                            ("sweep", "one gate, several noise strengths"),
                            ("circuit", "one netlist, one input"),
                            ("adder-compare", "average readout fidelity of two adders")]:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name in ("single-gate", "sweep"):
            p.add_argument("--gate", action="append", help="gate name or 'all' (repeatable)")
        if name in ("circuit", "adder-compare"):
            p.add_argument("--netlist", action="append",
                           help="netlist path or bundled name qckt1/qckt2 (repeatable)")
        if name == "adder-compare":
            p.add_argument("--jobs", type=int, help="parallel worker processes")
    return parser


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(" ")
        key = key.strip().lstrip("-").replace("_", "-")
        if not key:
            raise ConfigError(f"{path}:{lineno}: missing key")
        values[key] = value.strip()
    return values


def _floats(field_name: str, items) -> list[float]:
    try:
        return [float(x) for x in items]
    except (TypeError, ValueError):
        raise ConfigError(f"{field_name}: expected numbers, got {items!r}") from None


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


DEFAULT_SLOTS = {"single-gate": 4, "sweep": 4}


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(args.experiment)
    file_values = read_config_file(args.config) if args.config else {}
    known = {"input", "noise", "gamma", "lambda", "dt", "sample-every", "slots", "mode", "out",
             "gate", "netlist", "jobs", "paper-literal"}
    unknown = set(file_values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(key, cli_value):
        if cli_value not in (None, False, []):
            return cli_value
        if key in file_values:
            raw = file_values[key]
            return _split(raw) if key in REPEATABLE else raw
        return None

    if (v := pick("input", args.input)) is not None:
        cfg.input = v
    if (v := pick("noise", args.noise)) is not None:
        cfg.noise = v
    if (v := pick("gamma", args.gamma)) is not None:
        cfg.gammas = _floats("gamma", v)
    if (v := pick("lambda", args.lambda_)) is not None:
        cfg.lambdas = _floats("lambda", v)
    if (v := pick("dt", args.dt)) is not None:
        cfg.dt = _floats("dt", [v])[0]
    if (v := pick("sample-every", args.sample_every)) is not None:
        cfg.sample_every = int(_floats("sample-every", [v])[0])
    if (v := pick("slots", args.slots)) is not None:
        cfg.slots = int(_floats("slots", [v])[0])
    if (v := pick("mode", args.mode)) is not None:
        cfg.mode = v
    literal = pick("paper-literal", args.paper_literal)
    if literal is True or (isinstance(literal, str) and literal.lower() in ("1", "true", "yes")):
        cfg.mode = DriveMode.PAPER_LITERAL.value
    if (v := pick("out", args.out)) is not None:
        cfg.out = v
    if hasattr(args, "gate") and (v := pick("gate", args.gate)) is not None:
        cfg.gates = list(v)
    if hasattr(args, "netlist") and (v := pick("netlist", args.netlist)) is not None:
        cfg.netlists = list(v)
    if hasattr(args, "jobs") and (v := pick("jobs", args.jobs)) is not None:
        cfg.jobs = int(_floats("jobs", [v])[0])
    if cfg.slots is None:
        cfg.slots = DEFAULT_SLOTS.get(cfg.experiment)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    try:
        cfg.noise_kind
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from None
    try:
        cfg.drive_mode
    except ValueError:
        raise ConfigError(f"mode: unknown drive mode {cfg.mode!r}") from None
    if cfg.dt <= 0:
        raise ConfigError("dt: must be positive")
    if cfg.sample_every < 1:
        raise ConfigError("sample-every: must be a positive integer")
    if cfg.slots is not None and cfg.slots < 1:
        raise ConfigError("slots: must be a positive integer")
    if cfg.jobs < 1:
        raise ConfigError("jobs: must be a positive integer")
    if not cfg.strengths:
        raise ConfigError("gamma/lambda: need at least one strength")
    stray = {NoiseKind.AMPLITUDE: ("lambda", cfg.lambdas), NoiseKind.PHASE: ("gamma", cfg.gammas),
             NoiseKind.NONE: ("gamma/lambda", (cfg.gammas or []) + (cfg.lambdas or []) or None)}
    name, given = stray[cfg.noise_kind]
    if given is not None:
        raise ConfigError(f"{name}: does not apply to noise {cfg.noise_kind.value!r}; one noise kind per run")
    if any(s < 0 for s in cfg.strengths):
        raise ConfigError("gamma/lambda: strengths must be nonnegative")
    if cfg.experiment in ("single-gate", "sweep"):
        for g in cfg.gates:
            if g.lower() != "all":
                try:
                    GateKind.from_name(g)
                except KeyError:
                    raise ConfigError(f"gate: unknown gate {g!r}") from None
        if cfg.experiment == "sweep" and (len(cfg.gates) != 1 or cfg.gates[0].lower() == "all"):
            raise ConfigError("gate: sweep takes exactly one gate")
    if cfg.experiment == "adder-compare" and cfg.netlists and len(cfg.netlists) != 2:
        raise ConfigError("netlist: adder-compare takes exactly two netlists")
    if cfg.experiment == "circuit" and len(cfg.netlists) != 1:
        raise ConfigError("netlist: circuit takes exactly one netlist")


def parse_input(text: str, n_qubits: int):
    """Bitstring, or an ``a,b`` amplitude pair repeated on every qubit."""
    text = text.strip()
    if "," in text:
        try:
            a, b = (complex(x) for x in text.split(","))
        except ValueError:
            raise ConfigError(f"input: cannot parse amplitudes {text!r}") from None
        try:
            return states.product_state([(a, b)] * n_qubits)
        except states.StateError as exc:
            raise ConfigError(f"input: {exc}") from None
    if len(text) != n_qubits or any(ch not in "01" for ch in text):
        raise ConfigError(f"input: expected a {n_qubits}-bit string, got {text!r}")
    return states.pure(states.ket(text))


def _gate_list(names: list[str]) -> list[GateKind]:
    if any(n.lower() == "all" for n in names):
        names = ALL_GATES
    return [GateKind.from_name(n) for n in names]


def single_gate_netlist(kind: GateKind) -> Netlist:
    wires = SINGLE_GATE_WIRES[kind.arity]
    return Netlist(SINGLE_GATE_QUBITS, [GateInstance(kind, wires)], name=kind.label)


def _fmt(x: float) -> str:
    return f"{x:.8e}"


def write_csv(path: Path, meta: list[str], times, columns: list) -> None:
    header = ["time", "fidelity"] + [f"fidelity_{i}" for i in range(2, len(columns) + 1)]
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(header))
    for i, t in enumerate(times):
        lines.append(",".join([_fmt(t)] + [_fmt(col[i]) for col in columns]))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _input_tag(text: str) -> str:
    return text.replace(",", "_").replace(".", "p")


def run_single_gate(cfg: ExperimentConfig) -> str:
    rho0 = parse_input(cfg.input or "000", SINGLE_GATE_QUBITS)
    kind, strength = cfg.noise_kind, cfg.strengths[0]
    noise = NoiseSpec(kind, strength, SINGLE_GATE_QUBITS)
    results = []
    for gate in _gate_list(cfg.gates):
        run = circuit.simulate_circuit(single_gate_netlist(gate), rho0, noise, cfg.drive_mode,
                                       cfg.dt, cfg.slots, cfg.sample_every)
        meta = cfg.metadata() + [f"gate: {gate.label}", f"wires: {SINGLE_GATE_WIRES[gate.arity]}",
                                 f"readout fidelity: {_fmt(run.readout_fidelity)}"]
        if run.exempt:
            meta.append("warning: non-Hermitian drive; state invariants not enforced")
        write_csv(Path(cfg.out) / f"single-gate_{gate.label}_{_input_tag(cfg.input or '000')}.csv",
                  meta, run.series.times, [run.series.fidelity])
        results.append((gate.label, run.readout_fidelity, float(run.series.fidelity[-1])))
    lines = [f"single-gate: input {cfg.input or '000'}, noise {kind.value} strength {strength:g}, "
             f"mode {cfg.mode}",
             "gate       readout    end-of-window"]
    for label, f_read, f_end in sorted(results, key=lambda r: -r[1]):
        lines.append(f"{label:<10} {f_read:.6f}   {f_end:.6f}")
    return "\n".join(lines)


def sweep_monotone(columns: list[np.ndarray], tol: float = 1e-9) -> tuple[bool, bool]:
    """(pointwise non-increasing, final values strictly decreasing) across columns."""
    pointwise = all(np.all(b <= a + tol) for a, b in zip(columns, columns[1:]))
    final = all(b[-1] < a[-1] for a, b in zip(columns, columns[1:]))
    return pointwise, final


def run_sweep(cfg: ExperimentConfig) -> str:
    rho0 = parse_input(cfg.input or "000", SINGLE_GATE_QUBITS)
    gate = GateKind.from_name(cfg.gates[0])
    nl = single_gate_netlist(gate)
    strengths = cfg.strengths
    columns, times = [], None
    for s in strengths:
        run = circuit.simulate_circuit(nl, rho0, NoiseSpec(cfg.noise_kind, s, SINGLE_GATE_QUBITS),
                                       cfg.drive_mode, cfg.dt, cfg.slots, cfg.sample_every)
        columns.append(run.series.fidelity)
        times = run.series.times
    order = np.argsort(strengths, kind="stable")
    pointwise, final = sweep_monotone([columns[i] for i in order])
    meta = cfg.metadata() + [f"column {'fidelity' if i == 0 else f'fidelity_{i + 1}'}: strength {s:g}"
                             for i, s in enumerate(strengths)]
    meta.append(f"pointwise non-increasing in strength: {pointwise}")
    write_csv(Path(cfg.out) / f"sweep_{gate.label}_{_input_tag(cfg.input or '000')}.csv",
              meta, times, columns)
    lines = [f"sweep: gate {gate.label}, input {cfg.input or '000'}, noise {cfg.noise_kind.value}"]
    lines += [f"strength {s:<8g} final fidelity {c[-1]:.6f}" for s, c in zip(strengths, columns)]
    lines.append(f"pointwise non-increasing in strength: {pointwise}")
    lines.append(f"final fidelity strictly decreasing in strength: {final}")
    return "\n".join(lines)


def load_any_netlist(ref: str) -> Netlist:
    if ref in ("qckt1", "qckt2"):
        return circuit.bundled_adder(ref)
    try:
        return circuit.load_netlist(ref)
    except OSError as exc:
        raise ConfigError(f"netlist: cannot read {ref!r}: {exc}") from None


def run_circuit(cfg: ExperimentConfig) -> str:
    nl = load_any_netlist(cfg.netlists[0])
    rho0 = parse_input(cfg.input or "0" * nl.n_qubits, nl.n_qubits)
    noise = NoiseSpec(cfg.noise_kind, cfg.strengths[0], nl.n_qubits)
    run = circuit.simulate_circuit(nl, rho0, noise, cfg.drive_mode, cfg.dt, cfg.slots,
                                   cfg.sample_every)
    meta = cfg.metadata() + [f"netlist: {nl.name} ({nl.depth} gates)",
                             f"readout fidelity: {_fmt(run.readout_fidelity)}"]
    write_csv(Path(cfg.out) / f"circuit_{nl.name}_{_input_tag(cfg.input or '0')}.csv",
              meta, run.series.times, [run.series.fidelity])
    return (f"circuit {nl.name}: depth {nl.depth}, input {cfg.input}, readout fidelity "
            f"{run.readout_fidelity:.6f} at slot {run.readout_time:g}")


def run_adder_compare(cfg: ExperimentConfig) -> str:
    refs = cfg.netlists or ["qckt1", "qckt2"]
    a, b = (load_any_netlist(r) for r in refs)
    kind, strength = cfg.noise_kind, cfg.strengths[0]
    report = circuit.adder_compare(a, b, kind, strength, cfg.drive_mode, cfg.dt, cfg.jobs)
    out = Path(cfg.out)
    table = [f"# {m}" for m in cfg.metadata()]
    table.append(f"input,{a.name},{b.name}")
    for i, bits in enumerate(report.inputs):
        table.append(f"{bits},{_fmt(report.fidelities[a.name][i])},{_fmt(report.fidelities[b.name][i])}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "adder-compare_table.csv").write_text("\n".join(table) + "\n", encoding="utf-8")

    slots = cfg.slots or max(a.depth, b.depth)
    curves = [circuit.simulate_circuit(nl, "11100", NoiseSpec(kind, strength, nl.n_qubits),
                                       cfg.drive_mode, cfg.dt, slots, cfg.sample_every)
              for nl in (a, b)]
    crossing = curve_crossing(curves[0].series.times, curves[0].series.fidelity,
                              curves[1].series.fidelity)
    meta = cfg.metadata() + [f"column fidelity: {a.name}", f"column fidelity_2: {b.name}",
                             "input: 11100"]
    write_csv(out / "adder-compare_11100.csv", meta, curves[0].series.times,
              [c.series.fidelity for c in curves])
    lines = [f"adder-compare: noise {kind.value} strength {strength:g}, mode {cfg.mode}",
             f"input   {a.name:>8} {b.name:>8}"]
    for i, bits in enumerate(report.inputs):
        lines.append(f"{bits}  {report.fidelities[a.name][i]:8.4f} {report.fidelities[b.name][i]:8.4f}")
    lines.append(f"average {report.averages[a.name]:8.4f} {report.averages[b.name]:8.4f}")
    lines.append(f"relative improvement of {a.name} over {b.name}: {100 * report.improvement:.1f}%")
    cross = "none" if crossing is None else f"{crossing:.2f}"
    lines.append(f"input 11100 curves cross at slot: {cross}")
    return "\n".join(lines)


def curve_crossing(times, first, second) -> float | None:
    """First time after t=0 where ``second`` rises above ``first`` (linear interpolation)."""
    diff = np.asarray(first) - np.asarray(second)
    for i in range(1, len(diff)):
        if diff[i - 1] >= 0 > diff[i] and times[i - 1] > 0:
            frac = diff[i - 1] / (diff[i - 1] - diff[i])
            return float(times[i - 1] + frac * (times[i] - times[i - 1]))
    return None


RUNNERS = {"single-gate": run_single_gate, "sweep": run_sweep, "circuit": run_circuit,
           "adder-compare": run_adder_compare}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        if args.experiment is None:
            print(parser.format_help(), file=sys.stderr)
            return EXIT_CONFIG
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = resolve_config(args)
        print(RUNNERS[cfg.experiment](cfg))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_CONFIG
    except circuit.NetlistError as exc:
        print(f"config error: netlist {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (engine.IntegrationError, NegativityError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OracleError as exc:
        print(f"functional check failed:\n{exc}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
