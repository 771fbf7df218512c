"""Time evolution of density matrices.

Three propagation paths share one sampling grid so their trajectories can be
compared point by point:

* :func:`evolve` integrates the master equation with classical fixed-step RK4.
* :func:`evolve_superop` exponentiates the Liouvillian (small registers only).
* :func:`evolve_noiseless` applies exact unitary propagation.

The schedule is piecewise constant: a list of ``(H, duration)`` pairs.  Each
segment is split into ``round(duration / dt)`` equal steps so that segment
boundaries always land on grid points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qdecay import linalg
from qdecay.states import DensityMatrix

log = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_SAMPLE_EVERY = 25
TRACE_DRIFT_LIMIT = 1e-6
NEGATIVITY_LIMIT = -1e-6
SUPEROP_MAX_QUBITS = 2
STEP_MATRIX_MAX_DIM = 8


class IntegrationError(RuntimeError):
    """The integrated state left the set of density matrices; use a smaller dt."""


Schedule = Sequence[tuple[np.ndarray, float]]


@dataclass
class EvolutionProblem:
    rho0: DensityMatrix
    schedule: Schedule
    lindblad_ops: Sequence[np.ndarray] = ()
    dt: float = DEFAULT_DT
    sample_every: int = DEFAULT_SAMPLE_EVERY
    check_invariants: bool = True

    def __post_init__(self):
        dim = self.rho0.dim
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")
        for h, duration in self.schedule:
            if np.shape(h) != (dim, dim):
                raise ValueError(f"Hamiltonian of shape {np.shape(h)} for dimension {dim}")
            if duration <= 0:
                raise ValueError("segment durations must be positive")
        for op in self.lindblad_ops:
            if np.shape(op) != (dim, dim):
                raise ValueError(f"Lindblad operator of shape {np.shape(op)} for dimension {dim}")


@dataclass
class Trajectory:
    times: np.ndarray
    rho: np.ndarray  # shape (samples, dim, dim)
    boundaries: list[int] = field(default_factory=list)  # sample index at each segment end
    meta: dict = field(default_factory=dict)

    @property
    def states(self) -> list[DensityMatrix]:
        n = self.rho.shape[1].bit_length() - 1
        return [DensityMatrix(n, r) for r in self.rho]

    @property
    def trace(self) -> np.ndarray:
        return np.real(np.einsum("kii->k", self.rho))

    @property
    def purity(self) -> np.ndarray:
        return np.real(np.einsum("kij,kji->k", self.rho, self.rho))

    def final(self) -> np.ndarray:
        return self.rho[-1]


@dataclass(frozen=True)
class _Segment:
    start: float
    h: np.ndarray
    steps: int
    step: float
    sample_steps: tuple[int, ...]


def _segments(schedule: Schedule, dt: float, sample_every: int) -> list[_Segment]:
    out = []
    t = 0.0
    for h, duration in schedule:
        steps = max(1, int(round(duration / dt)))
        picks = [k for k in range(1, steps + 1) if k % sample_every == 0]
        if not picks or picks[-1] != steps:
            picks.append(steps)
        out.append(_Segment(t, np.asarray(h, dtype=complex), steps, duration / steps, tuple(picks)))
        t += duration
    return out


def time_grid(schedule: Schedule, dt: float = DEFAULT_DT,
              sample_every: int = DEFAULT_SAMPLE_EVERY) -> tuple[np.ndarray, list[int]]:
    """Sample times and the sample index of every segment boundary."""
    times = [0.0]
    bounds = []
    for seg in _segments(schedule, dt, sample_every):
        times.extend(seg.start + k * seg.step for k in seg.sample_steps)
        bounds.append(len(times) - 1)
    return np.array(times), bounds


def rhs(h, ls, rho) -> np.ndarray:
    """Right-hand side of the master equation (hbar = 1)."""
    h = np.asarray(h, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if h.shape != rho.shape:
        raise ValueError(f"dimension mismatch: H {h.shape} vs rho {rho.shape}")
    out = -1j * (h @ rho - rho @ h)
    for op in ls:
        op = np.asarray(op)
        if op.shape != rho.shape:
            raise ValueError(f"dimension mismatch: L {op.shape} vs rho {rho.shape}")
        opd = op.conj().T
        opdop = opd @ op
        out += 2 * op @ rho @ opd - opdop @ rho - rho @ opdop
    return out


class _Generator:
    """Master-equation right-hand side with the constant parts precomputed.

    Writes ``drho/dt = A rho + rho B + 2 sum_j L_j rho L_j^+`` with
    ``A = -iH - K``, ``B = iH - K`` and ``K = sum_j L_j^+ L_j``.
    """

    def __init__(self, h: np.ndarray, ls: Sequence[np.ndarray]):
        dim = h.shape[0]
        self.ls = np.array(ls, dtype=complex).reshape(-1, dim, dim)
        self.lds = self.ls.conj().transpose(0, 2, 1)
        k = np.einsum("jab,jbc->ac", self.lds, self.ls) if len(self.ls) else np.zeros_like(h)
        self.a = -1j * h - k
        self.b = 1j * h - k

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self.a @ rho + rho @ self.b
        if len(self.ls):
            out += 2 * np.sum(self.ls @ rho @ self.lds, axis=0)
        return out


def _rk4_step(f: _Generator, rho: np.ndarray, h: float) -> np.ndarray:
    k1 = f(rho)
    k2 = f(rho + 0.5 * h * k1)
    k3 = f(rho + 0.5 * h * k2)
    k4 = f(rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _step_matrix(f: _Generator, h: float, dim: int) -> np.ndarray:
    """One RK4 step as a matrix on column-stacked states.

    The master equation is linear and autonomous within a segment, so the RK4
    update is a fixed linear map; its columns are the images of the basis
    matrices under :func:`_rk4_step`.
    """
    cols = []
    for j in range(dim):
        for i in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            cols.append(_rk4_step(f, e, h).reshape(-1, order="F"))
    return np.array(cols).T


def _check(rho: np.ndarray, t: float, dt: float) -> None:
    drift = abs(np.trace(rho) - 1.0)
    if drift > TRACE_DRIFT_LIMIT:
        raise IntegrationError(f"trace drift {drift:.3e} at t={t:.4f}; reduce dt (now {dt:g})")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < NEGATIVITY_LIMIT:
        raise IntegrationError(f"eigenvalue {lam:.3e} at t={t:.4f}; reduce dt (now {dt:g})")


def evolve(problem: EvolutionProblem) -> Trajectory:
    """Fixed-step RK4 integration of the master equation.

    The trace is never renormalized; drift beyond ``TRACE_DRIFT_LIMIT`` or
    an eigenvalue below ``NEGATIVITY_LIMIT`` at a sample raises
    :class:`IntegrationError` when ``problem.check_invariants`` is set.
    """
    rho = np.array(problem.rho0.mat, dtype=complex)
    times, bounds = time_grid(problem.schedule, problem.dt, problem.sample_every)
    samples = [rho.copy()]
    dim = rho.shape[0]
    for seg in _segments(problem.schedule, problem.dt, problem.sample_every):
        f = _Generator(seg.h, problem.lindblad_ops)
        picks = set(seg.sample_steps)
        if dim <= STEP_MATRIX_MAX_DIM:
            # small registers: per-call overhead dominates, so step with the RK4 map
            step = _step_matrix(f, seg.step, dim)
            advance = lambda r: (step @ r.reshape(-1, order="F")).reshape(dim, dim, order="F")
        else:
            advance = lambda r: _rk4_step(f, r, seg.step)
        for k in range(1, seg.steps + 1):
            rho = advance(rho)
            if k in picks:
                if problem.check_invariants:
                    _check(rho, seg.start + k * seg.step, problem.dt)
                samples.append(rho.copy())
    return Trajectory(times, np.array(samples), bounds, {"method": "rk4", "dt": problem.dt})


@dataclass(frozen=True)
class InvariantReport:
    """Worst-case deviations from the density-matrix invariants over a trajectory."""

    max_trace_dev: float
    max_hermitian_dev: float
    min_eigenvalue: float

    def within(self, trace_tol: float = 1e-7, herm_tol: float = 1e-8, eig_tol: float = -1e-7) -> bool:
        return (self.max_trace_dev <= trace_tol and self.max_hermitian_dev <= herm_tol
                and self.min_eigenvalue >= eig_tol)


def invariant_report(traj: Trajectory) -> InvariantReport:
    rho = traj.rho
    herm = np.max(np.abs(rho - rho.conj().transpose(0, 2, 1)))
    sym = 0.5 * (rho + rho.conj().transpose(0, 2, 1))
    return InvariantReport(float(np.max(np.abs(traj.trace - 1.0))), float(herm),
                           float(np.min(np.linalg.eigvalsh(sym))))


def evolve_noiseless(rho0: DensityMatrix, schedule: Schedule, dt: float = DEFAULT_DT,
                     sample_every: int = DEFAULT_SAMPLE_EVERY) -> Trajectory:
    """Exact unitary propagation ``rho(t) = U(t) rho0 U(t)^+`` on the RK4 grid."""
    rho = np.array(rho0.mat, dtype=complex)
    times, bounds = time_grid(schedule, dt, sample_every)
    samples = [rho.copy()]
    for seg in _segments(schedule, dt, sample_every):
        for k in seg.sample_steps:
            u = linalg.expm(-1j * seg.h * (k * seg.step))
            samples.append(u @ rho @ u.conj().T)
        rho = samples[-1]
    return Trajectory(times, np.array(samples), bounds, {"method": "unitary", "dt": dt})


def liouvillian(h, ls) -> np.ndarray:
    """Superoperator acting on column-stacked density matrices."""
    h = np.asarray(h, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim)
    gen = _Generator(h, ls)
    # vec(A X B) = (B^T kron A) vec(X) for column stacking
    sup = np.kron(eye, gen.a) + np.kron(gen.b.T, eye)
    for op, opd in zip(gen.ls, gen.lds):
        sup += 2 * np.kron(opd.T, op)
    return sup


def _vec(m: np.ndarray) -> np.ndarray:
    return m.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def evolve_superop(problem: EvolutionProblem) -> Trajectory:
    """Propagate by exponentiating the Liouvillian on every sample offset."""
    n = problem.rho0.n_qubits
    if n > SUPEROP_MAX_QUBITS:
        raise ValueError(f"superoperator path supports at most {SUPEROP_MAX_QUBITS} qubits, got {n}")
    dim = problem.rho0.dim
    rho = np.array(problem.rho0.mat, dtype=complex)
    times, bounds = time_grid(problem.schedule, problem.dt, problem.sample_every)
    samples = [rho.copy()]
    for seg in _segments(problem.schedule, problem.dt, problem.sample_every):
        sup = liouvillian(seg.h, problem.lindblad_ops)
        v0 = _vec(rho)
        for k in seg.sample_steps:
            samples.append(_unvec(linalg.expm(sup * (k * seg.step)) @ v0, dim))
        rho = samples[-1]
    return Trajectory(times, np.array(samples), bounds, {"method": "superop", "dt": problem.dt})
