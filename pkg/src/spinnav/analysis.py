"""Parameter studies: pulse-center scans and minimal pulse area versus N."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .basis import SystemParams, basis_state
from .dynamics import PropagationError, propagate
from .pulses import Pulse, Schedule, gaussian, pulse_area

log = logging.getLogger(__name__)


class BracketError(RuntimeError):
    """No amplitude below the cap reaches the target efficiency."""


def final_populations(params: SystemParams, schedule: Schedule, psi0, tol: float = 1e-10) -> np.ndarray:
    """Populations at the end of the window, without intermediate sampling."""
    lo, hi = schedule.resolved_window(params)
    result = propagate(params, schedule, psi0, tol, times=np.array([lo, hi]))
    return result.final_populations


def transfer_efficiency(
    params: SystemParams, schedule: Schedule, source: int, target: int, tol: float = 1e-10
) -> float:
    """Final population of ``target`` starting from ``e_source``."""
    pops = final_populations(params, schedule, basis_state(params, source), tol)
    return float(pops[target])


def _scan_point(args):
    params, schedule, psi0, tol = args
    try:
        return final_populations(params, schedule, psi0, tol), None
    except (PropagationError, ValueError) as exc:
        return np.full(params.dim, np.nan), str(exc)


def _map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


@dataclass
class ScanResult:
    values: np.ndarray
    populations: np.ndarray  # (len(values), N+1)
    errors: list = field(default_factory=list)  # (index, message)
    metadata: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def peak(self, n: int) -> tuple[float, float]:
        """``(T0 at maximum, maximum)`` of the population of state ``n``."""
        col = self.populations[:, n]
        i = int(np.nanargmax(col))
        return float(self.values[i]), float(col[i])

    def plateau_width(self, n: int, level: float = 0.9) -> float:
        """Extent of the contiguous run above ``level`` around the peak.

        Each grid point counts with the local grid spacing, so a single point
        above the level still has a finite width.
        """
        col = self.populations[:, n]
        i = int(np.nanargmax(col))
        if not col[i] > level:
            return 0.0
        lo = i
        while lo > 0 and col[lo - 1] > level:
            lo -= 1
        hi = i
        while hi < len(col) - 1 and col[hi + 1] > level:
            hi += 1
        edges = np.concatenate(
            [[self.values[0]], (self.values[1:] + self.values[:-1]) / 2, [self.values[-1]]]
        )
        return float(edges[hi + 1] - edges[lo])


def scan_pulse_center(
    params: SystemParams,
    pulse: Pulse,
    t0_grid: Sequence[float],
    psi0=None,
    tol: float = 1e-10,
    workers: int = 1,
) -> ScanResult:
    """Final populations for ``pulse`` moved to each center in ``t0_grid``."""
    grid = np.asarray(t0_grid, dtype=float)
    if psi0 is None:
        psi0 = basis_state(params, 0)
    tasks = [(params, Schedule((pulse.shifted(t0 - pulse.t0),)), psi0, tol) for t0 in grid]
    out = _map(_scan_point, tasks, workers)
    pops = np.array([p for p, _ in out])
    errors = [(i, msg) for i, (_, msg) in enumerate(out) if msg is not None]
    for i, msg in errors:
        log.warning("scan point T0=%g failed: %s", grid[i], msg)
    meta = {"params": params.to_dict(), "pulse": pulse.to_dict(), "tol": tol}
    return ScanResult(grid, pops, errors, meta)


@dataclass
class AreaResult:
    area: float
    omega0: float
    efficiency: float
    evaluations: list = field(default_factory=list)  # (omega0, efficiency) in call order
    bracket: tuple = (0.0, 0.0)


def minimal_area(
    params: SystemParams,
    pulse: Optional[Pulse] = None,
    source: Optional[int] = None,
    target: int = 1,
    target_efficiency: float = 0.9,
    resolution: float = 0.01,
    tol: float = 1e-9,
    seed: Optional[float] = None,
    omega_cap: float = 1e5,
    max_iter: int = 60,
) -> AreaResult:
    """Smallest pulse area transferring ``source -> target`` with the target efficiency.

    The pulse shape, width and center stay fixed; only ``omega0`` moves. A
    bracket is found by halving/doubling from ``seed`` (default ``xi``), then
    bisected until the bracket is narrower than ``resolution`` in relative
    area and the upper end's efficiency lies within ``resolution`` of the
    target. Defaults follow the |N> -> |1> protocol with a unit-width Gaussian
    at ``xi/A``.
    """
    if source is None:
        source = params.N
    if pulse is None:
        pulse = gaussian(1.0, params.tau, 1.0)
    if source == target:
        return AreaResult(0.0, 0.0, 1.0)
    evaluations = []

    def efficiency(omega0: float) -> float:
        schedule = Schedule((pulse.scaled(omega0),))
        eff = transfer_efficiency(params, schedule, source, target, tol)
        evaluations.append((omega0, eff))
        return eff

    omega = float(seed if seed is not None else params.xi)
    if efficiency(omega) >= target_efficiency:
        hi, lo = omega, omega / 2
        while efficiency(lo) >= target_efficiency:
            hi, lo = lo, lo / 2
            if lo < 1e-12:
                raise BracketError("efficiency stays above target as omega0 -> 0")
    else:
        lo, hi = omega, omega * 2
        while efficiency(hi) < target_efficiency:
            lo, hi = hi, hi * 2
            if hi > omega_cap:
                raise BracketError(f"target efficiency not reached below omega0={omega_cap}")
    eff_hi = dict(evaluations)[hi]
    for _ in range(max_iter):
        if (hi - lo) <= resolution * hi and eff_hi - target_efficiency <= resolution:
            break
        mid = (lo + hi) / 2
        eff = efficiency(mid)
        if eff >= target_efficiency:
            hi, eff_hi = mid, eff
        else:
            lo = mid
    area = pulse_area(pulse.scaled(hi))
    return AreaResult(area, hi, eff_hi, evaluations, (lo, hi))


def _area_point(args):
    N, xi, A, kwargs = args
    params = SystemParams(N, xi, A)
    try:
        return minimal_area(params, **kwargs), None
    except (BracketError, PropagationError, ValueError) as exc:
        return None, str(exc)


@dataclass
class AreaCurve:
    N: np.ndarray
    areas: np.ndarray
    omega0: np.ndarray
    efficiencies: np.ndarray
    diagnostics: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (N, message)
    metadata: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def local_slopes(self) -> np.ndarray:
        return np.diff(self.areas) / np.diff(self.N)


def scaling_curve(
    xi: float,
    A: float,
    N_list: Sequence[int],
    width: float = 1.0,
    target_efficiency: float = 0.9,
    resolution: float = 0.01,
    tol: float = 1e-9,
    workers: int = 1,
) -> AreaCurve:
    """Minimal area of the |N> -> |1> transfer with a Gaussian at T0 = xi/A, per N."""
    N_list = [int(n) for n in N_list]
    if N_list != sorted(N_list):
        raise ValueError("N_list must be sorted")
    pulse = gaussian(1.0, xi / A, width)
    kwargs = dict(pulse=pulse, target=1, target_efficiency=target_efficiency, resolution=resolution, tol=tol)
    out = _map(_area_point, [(n, xi, A, kwargs) for n in N_list], workers)
    rows, errors, diags = [], [], []
    for n, (res, msg) in zip(N_list, out):
        if res is None:
            errors.append((n, msg))
            log.warning("minimal area for N=%d failed: %s", n, msg)
            rows.append((n, np.nan, np.nan, np.nan))
            diags.append({})
        else:
            rows.append((n, res.area, res.omega0, res.efficiency))
            diags.append({"bracket": list(res.bracket), "evaluations": [list(e) for e in res.evaluations]})
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    meta = {
        "xi": xi,
        "A": A,
        "width": width,
        "T0": xi / A,
        "target_efficiency": target_efficiency,
        "resolution": resolution,
        "tol": tol,
    }
    return AreaCurve(arr[:, 0].astype(int), arr[:, 1], arr[:, 2], arr[:, 3], diags, errors, meta)
