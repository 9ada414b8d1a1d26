"""Platform parameters mapped onto the collective-spin model.

Ion trap: bichromatic Molmer-Sorensen drive gives ``xi = 2 eta^2 Omega^2 nu / (nu^2 - delta^2)``.

Two-component BEC in the two-mode approximation: with equal intra-species
scattering ``U_aa = U_bb = U`` the Schwinger map turns the bosonic Hamiltonian
into ``alpha Jz + xi Jz^2 + 2 Omega(t) [Jx cos(phi) + Jy sin(phi)]`` with
``alpha = E_a - E_b`` and ``xi = U - U_ab / 2``. In the frame
``Psi = exp(-i phi Jz) Phi`` the transverse phase disappears and the
longitudinal term becomes ``alpha - dphi/dt``; the chirp
``phi = alpha t + A t^2 / 2`` turns it into the linear sweep ``-A t``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .basis import SystemParams, spin_operators
from .dynamics import Coupling, DriftModel, PulseSum, evolve, sample_times
from .pulses import Schedule, TRUNCATION_WIDTHS


@dataclass(frozen=True)
class IonTrapParams:
    eta: float  # Lamb-Dicke parameter
    omega_laser: float  # Rabi frequency of each laser
    nu: float  # phonon frequency
    delta: float  # symmetric detuning

    def __post_init__(self):
        if not (self.nu > 0 and self.delta > 0):
            raise ValueError("nu and delta must be positive")
        if self.delta == self.nu:
            raise ValueError("delta == nu is a pole of the effective coupling")


def ion_trap_xi(p: IonTrapParams) -> float:
    """Effective ``xi`` of the Molmer-Sorensen interaction.

    Warns when the detuning does not exceed the laser Rabi frequency (the
    effective Hamiltonian then does not apply) and when ``xi < 0``: with
    ``delta > nu`` every crossing time flips sign, so protocols must be run
    time-reflected.
    """
    if p.delta <= p.omega_laser:
        warnings.warn(
            f"detuning {p.delta} does not exceed the Rabi frequency {p.omega_laser}",
            RuntimeWarning,
            stacklevel=2,
        )
    xi = 2 * p.eta**2 * p.omega_laser**2 * p.nu / (p.nu**2 - p.delta**2)
    if xi < 0:
        warnings.warn(
            f"xi={xi:.6g} < 0 (delta > nu); run protocols time-reflected (t -> -t)",
            RuntimeWarning,
            stacklevel=2,
        )
    return float(xi)


@dataclass(frozen=True)
class BecParams:
    E_a: float
    E_b: float
    U_aa: float
    U_bb: float
    U_ab: float

    @property
    def equal_scattering(self) -> bool:
        return self.U_aa == self.U_bb


@dataclass(frozen=True)
class Chirp:
    """Coupling phase ``phi(t) = alpha t + A t^2 / 2``."""

    alpha: float
    A: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.alpha * t + 0.5 * self.A * t * t

    def rate(self, t):
        return self.alpha + self.A * np.asarray(t, dtype=float)


def design_chirp(alpha: float, A: float) -> Chirp:
    """Phase whose frame turns ``alpha Jz`` into the sweep ``-A t Jz``."""
    return Chirp(float(alpha), float(A))


@dataclass(frozen=True)
class BecMapping:
    xi: float
    alpha: float

    def linear_coefficient(self, t, chirp: Optional[Chirp] = None):
        """``alpha - dphi/dt`` multiplying ``Jz`` in the rotated frame."""
        rate = 0.0 if chirp is None else chirp.rate(t)
        return self.alpha - rate

    @staticmethod
    def transverse_amplitude(omega):
        """Coefficient of ``Jx`` in the rotated frame for coupling amplitude ``omega``."""
        return 2 * np.asarray(omega, dtype=float)

    def system_params(self, N: int, A: float) -> SystemParams:
        return SystemParams(N, self.xi, A)


def bec_effective_params(p: BecParams) -> BecMapping:
    if not p.equal_scattering:
        raise ValueError(
            f"U_aa={p.U_aa} != U_bb={p.U_bb}: the collective-spin mapping needs equal scattering"
        )
    return BecMapping(xi=p.U_aa - p.U_ab / 2, alpha=p.E_a - p.E_b)


def _fock_operators(N: int):
    """Number operators and ``a^dag b`` on ``|n_a = n, n_b = N - n>``."""
    na = np.arange(N + 1, dtype=float)
    nb = N - na
    hop = np.zeros((N + 1, N + 1))
    # a^dag b |n, N-n> = sqrt((n+1)(N-n)) |n+1, N-n-1>
    hop[np.arange(1, N + 1), np.arange(N)] = np.sqrt((na[:-1] + 1) * nb[:-1])
    return na, nb, hop


def bec_lab_model(p: BecParams, N: int, schedule: Schedule, chirp: Chirp) -> DriftModel:
    """Two-mode Hamiltonian in the Fock basis with coupling
    ``Omega(t) [a^dag b exp(-i phi) + b^dag a exp(i phi)]``."""
    na, nb, hop = _fock_operators(N)
    diag = (
        p.E_a * na
        + p.E_b * nb
        + 0.5 * p.U_aa * na * (na - 1)
        + 0.5 * p.U_bb * nb * (nb - 1)
        + 0.5 * p.U_ab * na * nb
    )
    omega = PulseSum(schedule.pulses)
    support = tuple(q.support() for q in schedule.pulses if q.omega0 > 0)
    # a^dag b e^{-i phi} + h.c. = cos(phi) (hop + hop^T) - i sin(phi) (hop - hop^T)
    sym = hop + hop.T
    antisym = -1j * (hop - hop.T)
    couplings = (
        Coupling(lambda t: omega(t) * np.cos(chirp(t)), sym, support),
        Coupling(lambda t: omega(t) * np.sin(chirp(t)), antisym, support),
    )
    return DriftModel(diag, np.zeros(N + 1), couplings)


def rotated_frame_model(mapping: BecMapping, N: int, schedule: Schedule, A: float) -> DriftModel:
    """``xi Jz^2 - A t Jz + 2 Omega(t) Jx``."""
    jx, _, _ = spin_operators(N)
    m = np.arange(N + 1) - N / 2
    omega = PulseSum(schedule.pulses)
    support = tuple(q.support() for q in schedule.pulses if q.omega0 > 0)
    coupling = Coupling(lambda t: mapping.transverse_amplitude(omega(t)), jx, support)
    return DriftModel(mapping.xi * m * m, -A * m, (coupling,))


def bec_lab_frame_check(
    p: BecParams,
    N: int,
    schedule: Schedule,
    A: float,
    psi0=None,
    tol: float = 1e-10,
    window=None,
) -> float:
    """Max amplitude deviation between lab-frame and rotated-frame propagation.

    The lab frame uses the chirp from :func:`design_chirp`; the rotated-frame
    state is mapped back with ``exp(-i phi(t) Jz)`` and the constant c-number
    energy of the bosonic Hamiltonian, then compared on the sample grid.
    """
    mapping = bec_effective_params(p)
    chirp = design_chirp(mapping.alpha, A)
    if psi0 is None:
        psi0 = np.zeros(N + 1, dtype=complex)
        psi0[0] = 1.0
    psi0 = np.asarray(psi0, dtype=complex)
    if window is None:
        if schedule.pulses:
            pad = TRUNCATION_WIDTHS * max(q.width for q in schedule.pulses)
            centers = [q.t0 for q in schedule.pulses]
            window = (min(centers) - pad, max(centers) + pad)
        else:
            window = (-1.0, 1.0)
    times = sample_times(window, schedule if schedule.pulses else None)

    lab = bec_lab_model(p, N, schedule, chirp)
    rot = rotated_frame_model(mapping, N, schedule, A)
    m = np.arange(N + 1) - N / 2
    offset = lab.diag0 - (mapping.alpha * m + mapping.xi * m * m)
    if np.ptp(offset) > 1e-9 * max(1.0, np.max(np.abs(lab.diag0))):
        raise AssertionError("bosonic and spin diagonals differ by more than a constant")
    c = float(np.mean(offset))

    t0 = times[0]
    frame0 = np.exp(-1j * chirp(t0) * m)
    lab_res = evolve(lab, frame0 * psi0, times, tol=tol)
    rot_res = evolve(rot, psi0, times, tol=tol)
    frames = np.exp(-1j * np.outer(chirp(times), m)) * np.exp(-1j * c * (times - t0))[:, None]
    mapped = frames * rot_res.amplitudes
    return float(np.max(np.abs(lab_res.amplitudes - mapped)))
