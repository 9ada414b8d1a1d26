"""Schrodinger-equation propagation over the symmetric subspace.

Two independent engines integrate ``i dpsi/dt = H(t) psi``:

* :func:`propagate` -- adaptive 8th-order Dormand-Prince (Fortran DOP853 via
  ``scipy.integrate.ode``) on the real/imaginary split of the state. Where
  every coupling vanishes identically the Hamiltonian is diagonal with
  linear-in-time entries and the phase is applied in closed form.
* :func:`propagate_reference` -- fixed-step exponential midpoint rule; each
  step is the exact exponential of the frozen Hamiltonian, so the norm is
  conserved to rounding.

Rotation events are applied as instantaneous unitaries. The state is never
renormalised; ``norm_drift`` reports the deviation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import ode

from .basis import SystemParams, spin_operators
from .pulses import Rotation, Schedule, amplitude

NORM_TOL = 1e-9


class PropagationError(RuntimeError):
    """Integration failed; ``t`` is where it stopped."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t


class StepSizeUnderflow(PropagationError):
    pass


class NumericalBlowup(PropagationError):
    pass


@dataclass(frozen=True)
class Coupling:
    """Term ``coefficient(t) * matrix`` that is zero outside ``support``."""

    coefficient: Callable[[np.ndarray], np.ndarray]
    matrix: np.ndarray
    support: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DriftModel:
    """``H(t) = diag(diag0 + diag1 * t) + sum_k c_k(t) M_k`` with real ``c_k``."""

    diag0: np.ndarray
    diag1: np.ndarray
    couplings: tuple[Coupling, ...] = ()

    @property
    def dim(self) -> int:
        return len(self.diag0)

    @property
    def is_real(self) -> bool:
        return all(np.isrealobj(c.matrix) or not np.any(c.matrix.imag) for c in self.couplings)

    def matrix(self, t: float) -> np.ndarray:
        h = np.diag(self.diag0 + self.diag1 * t).astype(complex if not self.is_real else float)
        for c in self.couplings:
            h = h + float(c.coefficient(t)) * (c.matrix if not self.is_real else c.matrix.real)
        return h

    def matrices(self, ts: np.ndarray) -> np.ndarray:
        """Stacked ``H(t)`` for an array of times."""
        real = self.is_real
        n = self.dim
        hs = np.zeros((len(ts), n, n), dtype=float if real else complex)
        idx = np.arange(n)
        hs[:, idx, idx] = self.diag0 + np.multiply.outer(ts, self.diag1)
        for c in self.couplings:
            m = c.matrix.real if real else c.matrix
            hs += np.multiply.outer(np.asarray(c.coefficient(ts), dtype=float), m)
        return hs

    def diagonal_phase(self, psi: np.ndarray, t1: float, t2: float) -> np.ndarray:
        """Exact evolution over an interval where all couplings vanish."""
        integral = self.diag0 * (t2 - t1) + self.diag1 * (t2 * t2 - t1 * t1) / 2
        return psi * np.exp(-1j * integral)

    def active_intervals(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Merged coupling supports clipped to ``[lo, hi]``."""
        spans = sorted(
            (max(a, lo), min(b, hi)) for c in self.couplings for a, b in c.support if b > lo and a < hi
        )
        merged: list[list[float]] = []
        for a, b in spans:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return [(a, b) for a, b in merged]


class PulseSum:
    """Callable ``Omega(t)`` with a scalar fast path for Gaussian pulses."""

    def __init__(self, pulses):
        self.pulses = tuple(pulses)
        self._gauss = [
            (p.omega0, p.t0, 1 / p.width, *p.support()) for p in self.pulses if p.shape == "gaussian"
        ]
        self._other = [p for p in self.pulses if p.shape != "gaussian"]

    def __call__(self, t):
        if np.ndim(t):
            return amplitude(Schedule(self.pulses), t)
        total = 0.0
        for omega0, t0, inv_w, lo, hi in self._gauss:
            if lo <= t <= hi:
                u = (t - t0) * inv_w
                total += omega0 * math.exp(-u * u)
        for p in self._other:
            total += float(p.envelope(t))
        return total


def schedule_model(params: SystemParams, schedule: Schedule) -> DriftModel:
    """``xi Jz^2 - A t Jz + Omega(t) Jx`` for a pulse schedule."""
    m = params.m()
    jx, _, _ = spin_operators(params.N)
    couplings = ()
    if schedule.pulses:
        support = tuple(p.support() for p in schedule.pulses if p.omega0 > 0)
        couplings = (Coupling(PulseSum(schedule.pulses), jx, support),)
    return DriftModel(m * m * params.xi, -m * params.A, couplings)


@dataclass
class SimulationResult:
    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), N+1), complex
    norm_drift: float
    method: str
    tol: Optional[float] = None
    dt: Optional[float] = None
    nfev: int = 0
    error_estimate: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def final_state(self) -> np.ndarray:
        return self.amplitudes[-1]

    @property
    def final_populations(self) -> np.ndarray:
        return self.populations[-1]


def as_state(psi, dim: Optional[int] = None) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if dim is not None and psi.shape != (dim,):
        raise ValueError(f"state has {psi.size} amplitudes, expected {dim}")
    if abs(np.vdot(psi, psi).real - 1) > NORM_TOL:
        raise ValueError("state must have unit norm")
    return psi


def sample_times(window, schedule: Optional[Schedule] = None, spacing: Optional[float] = None) -> np.ndarray:
    """Uniform grid over ``window`` at one tenth of the narrowest pulse width."""
    lo, hi = window
    if spacing is None:
        widths = [p.width for p in schedule.pulses] if schedule is not None else []
        spacing = min(widths) / 10 if widths else (hi - lo) / 100
    n = int(np.ceil((hi - lo) / spacing - 1e-9)) + 1
    return np.linspace(lo, hi, max(n, 2))


def _breakpoints(times: np.ndarray, rotations: Sequence[Rotation], lo: float, hi: float):
    for r in rotations:
        if not lo <= r.t <= hi:
            raise ValueError(f"rotation at t={r.t} lies outside the window [{lo}, {hi}]")
    if times[0] != lo or times[-1] != hi:
        raise ValueError("sample grid must start and end on the window edges")
    return sorted(set(times.tolist()) | {r.t for r in rotations})


def _apply_rotations(psi, rotations, t):
    for r in rotations:
        if r.t == t:
            psi = r.apply(psi)
    return psi


class _Stepper:
    """Adaptive integration of one model with the Fortran DOP853 code.

    With ``psi = x + i z`` the equation becomes ``d[x, z]/dt = K(t) [x, z]``
    where each Hermitian term ``R + i I`` contributes ``[[I, R], [-R, I]]``.
    """

    def __init__(self, model: DriftModel, tol: float):
        self.model = model
        self.tol = tol
        self.nfev = 0
        n = model.dim
        self.n = n

        def block(h):
            re, im = np.real(h), np.imag(h)
            return np.block([[im, re], [-re, im]])

        blocks = [block(np.diag(model.diag0)), block(np.diag(model.diag1))]
        blocks += [block(np.asarray(c.matrix, dtype=complex)) for c in model.couplings]
        self._shape = (2 * n, 2 * n)
        self._flat = np.array(blocks).reshape(len(blocks), -1)
        self.coeffs = [c.coefficient for c in model.couplings]
        self._weights = np.ones(len(blocks))

    def rhs(self, t, y):
        self.nfev += 1
        w = self._weights
        w[1] = t
        for i, coeff in enumerate(self.coeffs):
            w[i + 2] = coeff(t)
        return (w @ self._flat).reshape(self._shape) @ y

    def run(self, psi: np.ndarray, t1: float, stops: Sequence[float]):
        """Integrate from ``t1`` through each time in ``stops``; yields states."""
        solver = ode(self.rhs).set_integrator(
            "dop853", rtol=0.1 * self.tol, atol=0.01 * self.tol, nsteps=10**9, first_step=0.0
        )
        solver.set_initial_value(np.concatenate([psi.real, psi.imag]), t1)
        n = self.n
        for t in stops:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                y = solver.integrate(t)
            code = solver.get_return_code()
            if code == -3:
                raise StepSizeUnderflow("step size underflow", solver.t)
            if not solver.successful():
                raise PropagationError(f"DOP853 failed with code {code}", solver.t)
            if not np.all(np.isfinite(y)):
                raise NumericalBlowup("non-finite amplitude", solver.t)
            yield y[:n] + 1j * y[n:]


def _pieces(model: DriftModel, lo: float, hi: float, cuts: Sequence[float]):
    """Split ``[lo, hi]`` at coupling-support edges and ``cuts``; tag activity."""
    active = model.active_intervals(lo, hi)
    edges = {lo, hi} | {t for t in cuts if lo < t < hi}
    for a, b in active:
        edges |= {a, b}
    edges = sorted(edges)
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid = (a + b) / 2
        pieces.append((a, b, any(x <= mid <= y for x, y in active)))
    return pieces


def evolve(
    model: DriftModel,
    psi0,
    times: np.ndarray,
    rotations: Sequence[Rotation] = (),
    tol: float = 1e-10,
) -> SimulationResult:
    """Adaptive propagation of ``model`` sampled on ``times``.

    States are recorded after any rotation scheduled at the same instant.
    """
    psi = as_state(psi0, model.dim)
    times = np.asarray(times, dtype=float)
    lo, hi = float(times[0]), float(times[-1])
    _breakpoints(times, rotations, lo, hi)
    stepper = _Stepper(model, tol)
    grid = times.tolist()

    psi = _apply_rotations(psi, rotations, lo)
    states = {lo: psi}
    k = 1  # next sample to record
    for a, b, active in _pieces(model, lo, hi, [r.t for r in rotations]):
        stops = []
        while k < len(grid) and grid[k] <= b:
            if grid[k] < b:
                stops.append(grid[k])
            k += 1
        stops.append(b)
        if active:
            path = stepper.run(psi, a, stops)
        else:
            path = (model.diagonal_phase(psi, a, t) for t in stops)
        for t, phi in zip(stops, path):
            states[t] = phi
        psi = _apply_rotations(states[b], rotations, b)
        states[b] = psi
    amps = np.array([states[t] for t in grid])
    if not np.all(np.isfinite(amps)):
        raise NumericalBlowup("non-finite amplitude", hi)
    drift = float(np.max(np.abs(np.sum(np.abs(amps) ** 2, axis=1) - 1)))
    steps = stepper.nfev / 12
    return SimulationResult(
        times=times,
        amplitudes=amps,
        norm_drift=drift,
        method="dop853",
        tol=tol,
        nfev=stepper.nfev,
        error_estimate=max(drift, tol * max(steps, 1.0)),
    )


def evolve_reference(
    model: DriftModel,
    psi0,
    times: np.ndarray,
    rotations: Sequence[Rotation] = (),
    dt: float = 1e-3,
) -> SimulationResult:
    """Fixed-step exponential midpoint propagation of ``model`` on ``times``.

    Every interval between consecutive sample/rotation times is cut into equal
    steps no longer than ``dt``.
    """
    psi = as_state(psi0, model.dim)
    times = np.asarray(times, dtype=float)
    lo, hi = float(times[0]), float(times[-1])
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > hi - lo:
        raise ValueError(f"dt={dt} exceeds the window length {hi - lo}")
    points = _breakpoints(times, rotations, lo, hi)
    psi = _apply_rotations(psi, rotations, lo)
    states = {lo: psi}
    for t1, t2 in zip(points[:-1], points[1:]):
        nsteps = int(np.ceil((t2 - t1) / dt - 1e-9))
        h = (t2 - t1) / nsteps
        mids = t1 + (np.arange(nsteps) + 0.5) * h
        w, v = np.linalg.eigh(model.matrices(mids))
        phases = np.exp(-1j * h * w)
        for k in range(nsteps):
            vk = v[k]
            psi = vk @ (phases[k] * (vk.conj().T @ psi))
        psi = _apply_rotations(psi, rotations, t2)
        states[t2] = psi
    amps = np.array([states[t] for t in times.tolist()])
    drift = float(np.max(np.abs(np.sum(np.abs(amps) ** 2, axis=1) - 1)))
    return SimulationResult(times=times, amplitudes=amps, norm_drift=drift, method="midpoint-exp", dt=dt)


def _setup(params, schedule, psi0, times):
    window = schedule.resolved_window(params)
    if times is None:
        times = sample_times(window, schedule)
    model = schedule_model(params, schedule)
    return model, as_state(psi0, params.dim), np.asarray(times, dtype=float)


def propagate(
    params: SystemParams,
    schedule: Schedule,
    psi0,
    tol: float = 1e-10,
    times: Optional[np.ndarray] = None,
) -> SimulationResult:
    """Adaptive propagation of ``xi Jz^2 - A t Jz + Omega(t) Jx``.

    ``times`` defaults to the schedule window sampled at a tenth of the
    narrowest pulse width.
    """
    model, psi0, times = _setup(params, schedule, psi0, times)
    result = evolve(model, psi0, times, schedule.rotations, tol)
    result.metadata = {"params": params.to_dict(), "schedule": schedule.to_dict()}
    return result


def propagate_reference(
    params: SystemParams,
    schedule: Schedule,
    psi0,
    dt: float = 1e-3,
    times: Optional[np.ndarray] = None,
) -> SimulationResult:
    model, psi0, times = _setup(params, schedule, psi0, times)
    result = evolve_reference(model, psi0, times, schedule.rotations, dt)
    result.metadata = {"params": params.to_dict(), "schedule": schedule.to_dict()}
    return result


def fidelity(a, b) -> float:
    """``|<a|b>|^2``."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(abs(np.vdot(a, b)) ** 2)


def phase_optimized_fidelity(a, b, component: int = -1) -> tuple[float, float]:
    """Best ``|<a|b>|^2`` over a phase on one component of ``a``.

    Returns ``(fidelity, phase)`` where ``phase`` is applied to
    ``a[component]``. For the GHZ target with ``component=-1`` this scores a
    state ``(e_0 + exp(i phase) e_N)/sqrt(2)`` as perfect.
    """
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    k = component % len(a)
    y = np.conj(a[k]) * b[k]
    x = np.vdot(a, b) - y
    if abs(y) == 0 or abs(x) == 0:
        return float((abs(x) + abs(y)) ** 2), 0.0
    # maximise |x + exp(-i phase) y|: align the two terms
    phase = float(np.angle(y) - np.angle(x))
    phase = (phase + np.pi) % (2 * np.pi) - np.pi
    return float((abs(x) + abs(y)) ** 2), phase
