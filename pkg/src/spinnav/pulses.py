"""Transverse-field schedules: pulse envelopes, instantaneous rotations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import integrate

from .basis import SystemParams

# exp(-8**2) ~ 1.6e-28 of the peak is dropped at the cut
TRUNCATION_WIDTHS = 8.0

PulseShape = Literal["gaussian", "flattop", "tabulated"]


@dataclass(frozen=True)
class Pulse:
    """One transverse-field envelope ``omega0 * f(t - t0)``.

    ``gaussian``: ``exp(-(t - t0)**2 / width**2)``.
    ``flattop``: constant over ``|t - t0| <= duration/2`` with Gaussian edges
    of width ``width`` (the rise time).
    ``tabulated``: linear interpolation of ``samples`` = (offsets from t0,
    envelope values), zero outside the table; ``width`` only sets the scale
    used by schedule checks.
    """

    shape: PulseShape = "gaussian"
    omega0: float = 0.0
    t0: float = 0.0
    width: float = 1.0
    duration: float = 0.0
    samples: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None

    def __post_init__(self):
        if self.shape not in ("gaussian", "flattop", "tabulated"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if not self.omega0 >= 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0!r}")
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width!r}")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.shape == "tabulated":
            if self.samples is None:
                raise ValueError("tabulated pulse needs samples")
            x, y = (tuple(float(v) for v in s) for s in self.samples)
            if len(x) != len(y) or len(x) < 2 or np.any(np.diff(x) <= 0):
                raise ValueError("samples need >= 2 strictly increasing offsets")
            object.__setattr__(self, "samples", (x, y))

    def envelope(self, t) -> np.ndarray:
        """Amplitude at ``t`` (scalar or array), truncated outside ``support``."""
        t = np.asarray(t, dtype=float)
        dt = t - self.t0
        if self.shape == "tabulated":
            x, y = self.samples
            return self.omega0 * np.interp(dt, x, y, left=0.0, right=0.0)
        excess = np.maximum(np.abs(dt) - self.duration / 2, 0.0) if self.shape == "flattop" else dt
        out = self.omega0 * np.exp(-((excess / self.width) ** 2))
        lo, hi = self.support()
        return np.where((t >= lo) & (t <= hi), out, 0.0)

    def support(self) -> tuple[float, float]:
        """Interval outside which the envelope is exactly zero."""
        if self.shape == "tabulated":
            x, _ = self.samples
            return self.t0 + x[0], self.t0 + x[-1]
        half = TRUNCATION_WIDTHS * self.width
        if self.shape == "flattop":
            half += self.duration / 2
        return self.t0 - half, self.t0 + half

    def shifted(self, dt: float) -> "Pulse":
        return Pulse(self.shape, self.omega0, self.t0 + dt, self.width, self.duration, self.samples)

    def scaled(self, omega0: float) -> "Pulse":
        return Pulse(self.shape, omega0, self.t0, self.width, self.duration, self.samples)

    def to_dict(self) -> dict:
        d = {"shape": self.shape, "omega0": self.omega0, "t0": self.t0, "width": self.width}
        if self.shape == "flattop":
            d["duration"] = self.duration
        if self.shape == "tabulated":
            d["samples"] = [list(self.samples[0]), list(self.samples[1])]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Pulse":
        samples = d.get("samples")
        if samples is not None:
            samples = (tuple(samples[0]), tuple(samples[1]))
        return cls(
            shape=d.get("shape", "gaussian"),
            omega0=float(d["omega0"]),
            t0=float(d.get("t0", 0.0)),
            width=float(d.get("width", 1.0)),
            duration=float(d.get("duration", 0.0)),
            samples=samples,
        )


def gaussian(omega0: float, t0: float, width: float = 1.0) -> Pulse:
    return Pulse("gaussian", omega0, t0, width)


@dataclass(frozen=True)
class Rotation:
    """Instantaneous rotation by ``angle`` in the plane of two basis states.

    Acts as ``[[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]]`` on
    ``(e_i, e_j)``, so ``angle = pi/2`` takes ``e_i`` to ``(e_i + e_j)/sqrt(2)``.
    """

    t: float
    subspace: tuple[int, int] = (0, 1)
    angle: float = np.pi / 2

    def __post_init__(self):
        i, j = self.subspace
        if i == j:
            raise ValueError("rotation subspace needs two distinct states")
        if not -2 * np.pi < self.angle <= 2 * np.pi:
            raise ValueError("rotation angle must lie in (-2pi, 2pi]")
        object.__setattr__(self, "subspace", (int(i), int(j)))

    def apply(self, psi: np.ndarray) -> np.ndarray:
        i, j = self.subspace
        c, s = np.cos(self.angle / 2), np.sin(self.angle / 2)
        out = psi.copy()
        out[i] = c * psi[i] - s * psi[j]
        out[j] = s * psi[i] + c * psi[j]
        return out

    def to_dict(self) -> dict:
        return {"t": self.t, "subspace": list(self.subspace), "angle": self.angle}

    @classmethod
    def from_dict(cls, d: dict) -> "Rotation":
        return cls(float(d["t"]), tuple(d.get("subspace", (0, 1))), float(d.get("angle", np.pi / 2)))


@dataclass(frozen=True)
class Schedule:
    """Pulses plus rotations; ``window=None`` means "derive from the system"."""

    pulses: tuple[Pulse, ...] = ()
    rotations: tuple[Rotation, ...] = ()
    window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        object.__setattr__(self, "rotations", tuple(sorted(self.rotations, key=lambda r: r.t)))
        if self.window is not None:
            lo, hi = (float(v) for v in self.window)
            if not lo < hi:
                raise ValueError("window needs t_start < t_end")
            inside = [p.t0 for p in self.pulses] + [r.t for r in self.rotations]
            if any(not lo <= v <= hi for v in inside):
                raise ValueError("window must contain every pulse center and rotation")
            object.__setattr__(self, "window", (lo, hi))

    def resolved_window(self, params: SystemParams) -> tuple[float, float]:
        """Explicit window, else crossings and pulse centers padded by 8 max widths."""
        if self.window is not None:
            return self.window
        N, tau = params.N, params.tau
        anchors = [-(N - 1) * tau, (N - 1) * tau]
        anchors += [p.t0 for p in self.pulses] + [r.t for r in self.rotations]
        pad = TRUNCATION_WIDTHS * max((p.width for p in self.pulses), default=1.0)
        pad += max((p.duration / 2 for p in self.pulses), default=0.0)
        return min(anchors) - pad, max(anchors) + pad

    def with_window(self, window) -> "Schedule":
        return Schedule(self.pulses, self.rotations, window)

    def shifted(self, dt: float) -> "Schedule":
        window = None if self.window is None else (self.window[0] + dt, self.window[1] + dt)
        rotations = tuple(Rotation(r.t + dt, r.subspace, r.angle) for r in self.rotations)
        return Schedule(tuple(p.shifted(dt) for p in self.pulses), rotations, window)

    def to_dict(self) -> dict:
        d = {
            "pulses": [p.to_dict() for p in self.pulses],
            "rotations": [r.to_dict() for r in self.rotations],
        }
        if self.window is not None:
            d["window"] = list(self.window)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        window = d.get("window")
        return cls(
            tuple(Pulse.from_dict(p) for p in d.get("pulses", ())),
            tuple(Rotation.from_dict(r) for r in d.get("rotations", ())),
            None if window is None else tuple(window),
        )


def amplitude(schedule: Schedule, t) -> np.ndarray:
    """Total transverse amplitude Omega(t)."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for p in schedule.pulses:
        total = total + p.envelope(t)
    return total


def pulse_area(pulse: Pulse) -> float:
    """Time integral of the envelope."""
    if pulse.omega0 == 0:
        return 0.0
    if pulse.shape == "gaussian":
        return pulse.omega0 * pulse.width * np.sqrt(np.pi)
    if pulse.shape == "tabulated":
        # exact for the piecewise-linear interpolant
        x, y = pulse.samples
        return pulse.omega0 * float(integrate.trapezoid(y, x))
    lo, hi = pulse.support()
    half = pulse.duration / 2
    pieces = [(lo, pulse.t0 - half), (pulse.t0 - half, pulse.t0 + half), (pulse.t0 + half, hi)]
    total = 0.0
    for a, b in pieces:
        if b > a:
            val, _ = integrate.quad(pulse.envelope, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
            total += val
    return total


@dataclass
class PulseCheck:
    index: int
    t0: float
    width_ratio: float  # width * A / xi
    status: str  # "separated" | "marginal" | "wide"
    overlaps: list[int] = field(default_factory=list)


@dataclass
class ScheduleReport:
    threshold: float
    pulses: list[PulseCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """No two pulses aimed at different crossings overlap."""
        return not any(p.overlaps for p in self.pulses)

    @property
    def strict(self) -> bool:
        return self.passed and all(p.status != "marginal" for p in self.pulses)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "passed": self.passed,
            "strict": self.strict,
            "pulses": [vars(p) for p in self.pulses],
        }


def validate_schedule(
    schedule: Schedule,
    params: SystemParams,
    threshold: float = 0.2,
    overlap_level: float = 0.01,
) -> ScheduleReport:
    """Check pulse widths against the crossing spacing xi/A.

    A pulse is ``separated`` when ``width*A/xi <= threshold``, ``wide`` when
    every crossing lies within one width of its center, ``marginal``
    otherwise. Two pulses with different centers overlap when either one
    exceeds ``overlap_level`` of its own peak at the other's center.
    """
    report = ScheduleReport(threshold)
    crossings = np.arange(-(params.N - 1), params.N) * params.tau
    pulses = schedule.pulses
    for i, p in enumerate(pulses):
        ratio = p.width / params.tau
        reach = p.width + p.duration / 2
        if params.N > 1 and np.all(np.abs(crossings - p.t0) <= reach):
            status = "wide"
        elif ratio <= threshold:
            status = "separated"
        else:
            status = "marginal"
        overlaps = []
        for j, q in enumerate(pulses):
            if j == i or np.isclose(q.t0, p.t0) or p.omega0 == 0 or q.omega0 == 0:
                continue
            if p.envelope(q.t0) > overlap_level * p.omega0 or q.envelope(p.t0) > overlap_level * q.omega0:
                overlaps.append(j)
        report.pulses.append(PulseCheck(i, p.t0, ratio, status, overlaps))
    return report
