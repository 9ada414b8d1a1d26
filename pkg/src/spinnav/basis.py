"""Symmetric (Dicke) subspace of N spin-1/2 particles.

States are labelled by the excitation number ``n = 0..N`` with angular
momentum projection ``m = n - N/2``. Energies and times use the pulse-width
unit T: energies in 1/T, times in T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

StateName = Literal["product_down", "product_up", "W_low", "W_high", "GHZ"]


@dataclass(frozen=True)
class SystemParams:
    """Particle number ``N``, nonlinearity ``xi`` and sweep rate ``A``."""

    N: int
    xi: float
    A: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise ValueError(f"xi must be positive, got {self.xi!r}")
        if not np.isfinite(self.A) or self.A <= 0:
            raise ValueError(f"A must be positive, got {self.A!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "A", float(self.A))

    @property
    def J(self) -> float:
        return self.N / 2

    @property
    def dim(self) -> int:
        return self.N + 1

    @property
    def tau(self) -> float:
        """Spacing xi/A between neighbouring crossing times."""
        return self.xi / self.A

    def m(self, n=None):
        """Projection ``m = n - N/2``; all of them when ``n`` is None."""
        if n is None:
            return np.arange(self.N + 1) - self.N / 2
        return _check_index(self, n) - self.N / 2

    def to_dict(self) -> dict:
        return {"N": self.N, "xi": self.xi, "A": self.A}


def _check_index(params: SystemParams, n) -> int:
    if int(n) != n or not 0 <= n <= params.N:
        raise IndexError(f"state index {n!r} outside 0..{params.N}")
    return int(n)


def energy(params: SystemParams, n: int, t):
    """Diabatic energy ``m^2 xi - m A t`` of state ``n`` at time ``t``."""
    m = params.m(n)
    return m * m * params.xi - m * params.A * np.asarray(t, dtype=float)


def energies(params: SystemParams, t) -> np.ndarray:
    """All diabatic energies; shape ``(N+1,)`` or ``(len(t), N+1)``."""
    m = params.m()
    t = np.asarray(t, dtype=float)
    return m * m * params.xi - np.multiply.outer(t, m) * params.A


def crossing_time(params: SystemParams, n: int, k: int) -> float:
    n, k = _check_index(params, n), _check_index(params, k)
    if n == k:
        raise ValueError("a state does not cross itself")
    return (n + k - params.N) * params.tau


def coupling_factor(params: SystemParams, n: int) -> float:
    """Rabi factor ``sqrt(J(J+1) - m(m+1))`` between ``n`` and ``n+1``.

    This is the dimensionless multiplier of the pulse amplitude used by the
    adiabaticity estimates. The Hamiltonian matrix element is half of it.
    """
    n = _check_index(params, n)
    if n == params.N:
        raise IndexError(f"state {n} has no upper neighbour")
    J, m = params.J, params.m(n)
    return float(np.sqrt(J * (J + 1) - m * (m + 1)))


def coupling_factors(params: SystemParams) -> np.ndarray:
    J = params.J
    m = params.m()[:-1]
    return np.sqrt(J * (J + 1) - m * (m + 1))


def spin_operators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense ``(Jx, Jy, Jz)`` in the ``n = 0..N`` basis."""
    m = np.arange(N + 1) - N / 2
    J = N / 2
    raise_ = np.diag(np.sqrt(J * (J + 1) - m[:-1] * (m[:-1] + 1)), -1)  # <n+1|J+|n>
    jx = (raise_ + raise_.T) / 2
    jy = (raise_ - raise_.T) / 2j
    jz = np.diag(m)
    return jx, jy, jz


def build_hamiltonian(params: SystemParams, omega: float, t: float) -> np.ndarray:
    """``xi Jz^2 - A t Jz + omega Jx`` as a dense real symmetric matrix."""
    if not (np.isfinite(omega) and np.isfinite(t)):
        raise ValueError("omega and t must be finite")
    h = np.diag(energies(params, t))
    off = 0.5 * omega * coupling_factors(params)
    h[np.arange(params.N), np.arange(1, params.N + 1)] = off
    h[np.arange(1, params.N + 1), np.arange(params.N)] = off
    return h


def basis_state(params: SystemParams, n: int) -> np.ndarray:
    psi = np.zeros(params.dim, dtype=complex)
    psi[_check_index(params, n)] = 1.0
    return psi


def named_state(params: SystemParams, which: StateName) -> np.ndarray:
    N = params.N
    if which == "GHZ":
        psi = np.zeros(N + 1, dtype=complex)
        psi[0] = psi[N] = 1 / np.sqrt(2)
        return psi
    index = {"product_down": 0, "product_up": N, "W_low": 1, "W_high": N - 1}
    try:
        return basis_state(params, index[which])
    except KeyError:
        raise ValueError(f"unknown state name {which!r}") from None
