"""Crossing network, route planning and pulse synthesis.

Diabatic states ``n`` and ``k`` cross at ``t_nk = (n + k - N) xi / A``. A
pulse centred on a crossing opens an avoided crossing there and moves the
population adiabatically between the two states. Because the sweep only runs
forward in time, a route is a chain of crossings with strictly increasing
times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .basis import SystemParams, coupling_factor, crossing_time, energy, named_state
from .dynamics import phase_optimized_fidelity, fidelity, propagate
from .pulses import Pulse, Rotation, Schedule, gaussian, validate_schedule

DEFAULT_MARGIN = 5.0
DEFAULT_SEPARATION = 0.2


class RouteInfeasible(ValueError):
    pass


class ScheduleConflict(ValueError):
    pass


class RegimeError(ValueError):
    """Perturbative estimate requested outside ``omega < N xi``."""


@dataclass(frozen=True)
class Edge:
    """Diabatic crossing between states ``n < k``.

    ``invariant_offset`` is the crossing time in units of xi/A with the
    partner of a product state labelled N-free (excitations above |0> for
    edges on |N>, de-excitations below |N> for edges on |0>); ``None`` for
    edges whose time moves with N.
    """

    n: int
    k: int
    time: float
    order: int
    energy: float
    n_invariant: bool
    invariant_offset: Optional[int] = None

    def other(self, state: int) -> int:
        if state == self.n:
            return self.k
        if state == self.k:
            return self.n
        raise ValueError(f"state {state} is not on edge ({self.n}, {self.k})")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "time": self.time,
            "order": self.order,
            "energy": self.energy,
            "n_invariant": self.n_invariant,
            "invariant_offset": self.invariant_offset,
        }


@dataclass(frozen=True)
class CrossingGraph:
    params: SystemParams
    edges: tuple[Edge, ...]

    @property
    def nodes(self) -> range:
        return range(self.params.N + 1)

    def edge(self, n: int, k: int) -> Edge:
        a, b = sorted((n, k))
        for e in self.edges:
            if (e.n, e.k) == (a, b):
                return e
        raise KeyError((n, k))

    def distinct_times(self, decimals: int = 9) -> np.ndarray:
        return np.unique(np.round([e.time for e in self.edges], decimals))

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "edges": [e.to_dict() for e in self.edges]}


def _invariant_offset(N: int, n: int, k: int) -> Optional[int]:
    if k == N:
        # partner counted in excitations: t = n xi/A
        return n
    if n == 0:
        # partner counted in de-excitations d = N - k: t = -d xi/A
        return -(N - k)
    return None


def build_crossing_graph(params: SystemParams) -> CrossingGraph:
    N = params.N
    edges = []
    for n in range(N + 1):
        for k in range(n + 1, N + 1):
            t = crossing_time(params, n, k)
            offset = _invariant_offset(N, n, k)
            edges.append(
                Edge(n, k, t, k - n, float(energy(params, n, t)), offset is not None, offset)
            )
    return CrossingGraph(params, tuple(edges))


@dataclass(frozen=True)
class Hop:
    edge: Edge
    source: int
    target: int
    pulse: Optional[Pulse] = None

    @property
    def time(self) -> float:
        return self.edge.time

    def to_dict(self) -> dict:
        d = {"source": self.source, "target": self.target, "edge": self.edge.to_dict()}
        if self.pulse is not None:
            d["pulse"] = self.pulse.to_dict()
        return d


@dataclass(frozen=True)
class Route:
    params: SystemParams
    source: int
    target: int
    hops: tuple[Hop, ...] = ()

    def __post_init__(self):
        state = self.source
        last = -np.inf
        for h in self.hops:
            if h.source != state:
                raise ValueError("consecutive hops must share a state")
            if not h.time > last:
                raise ValueError("hop times must increase strictly along a route")
            state, last = h.target, h.time
        if state != self.target:
            raise ValueError("route does not end on its target")

    @property
    def max_order(self) -> int:
        return max((h.edge.order for h in self.hops), default=0)

    @property
    def completion_time(self) -> float:
        return self.hops[-1].time if self.hops else -np.inf

    @property
    def n_invariant(self) -> bool:
        return all(h.edge.n_invariant for h in self.hops)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "source": self.source,
            "target": self.target,
            "max_order": self.max_order,
            "n_invariant": self.n_invariant,
            "hops": [h.to_dict() for h in self.hops],
        }


def recommended_pulse(
    params: SystemParams,
    edge: Edge,
    width: Optional[float] = None,
    margin: float = DEFAULT_MARGIN,
) -> Pulse:
    """Gaussian on the crossing sized from the adiabaticity estimate.

    Adjacent hops get ``omega0 = margin * sqrt(A) / factor``; multi-quantum
    hops start from ``omega0 = N xi``, a seed to be refined numerically.
    """
    if width is None:
        width = DEFAULT_SEPARATION * params.tau
    if edge.order == 1:
        omega0 = margin * np.sqrt(params.A) / coupling_factor(params, edge.n)
    else:
        omega0 = params.N * params.xi
    return gaussian(float(omega0), edge.time, width)


_STRATEGIES = ("shortest", "sequential", "direct", "N_invariant")


def plan_route(
    graph: CrossingGraph,
    source: int,
    target: int,
    strategy: str = "shortest",
    max_order: Optional[int] = None,
    require_N_invariant: bool = False,
    width: Optional[float] = None,
) -> Route:
    """Time-ordered chain of crossings from ``source`` to ``target``.

    ``sequential`` restricts to adjacent (order-1) hops, ``direct`` to the
    single crossing between the two states, ``N_invariant`` to flagged edges.
    Among feasible chains the one with fewest hops wins, then lowest maximum
    order, then earliest completion.
    """
    params = graph.params
    for s in (source, target):
        if not 0 <= s <= params.N:
            raise IndexError(f"state index {s} outside 0..{params.N}")
    if source == target:
        raise ValueError("source and target coincide")
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; pick one of {_STRATEGIES}")
    if strategy == "sequential":
        max_order = 1 if max_order is None else min(max_order, 1)
    if strategy == "N_invariant":
        require_N_invariant = True

    edges = [
        e
        for e in graph.edges
        if (max_order is None or e.order <= max_order) and (e.n_invariant or not require_N_invariant)
    ]
    if strategy == "direct":
        edges = [e for e in edges if {e.n, e.k} == {source, target}]

    best = _search(edges, source, target)
    if best is None:
        raise RouteInfeasible(
            f"no time-ordered route {source}->{target} with strategy={strategy}, "
            f"max_order={max_order}, require_N_invariant={require_N_invariant}"
        )
    hops = []
    state = source
    for e in best:
        nxt = e.other(state)
        hops.append(Hop(e, state, nxt, recommended_pulse(params, e, width)))
        state = nxt
    return Route(params, source, target, tuple(hops))


def _search(edges: Sequence[Edge], source: int, target: int) -> Optional[list[Edge]]:
    """Pareto label-setting over edges in time order.

    A label is (hops, max order, arrival time, path); labels at the same state
    are kept unless another is no worse in all three costs.
    """
    labels: dict[int, list[tuple[int, int, float, tuple]]] = {source: [(0, 0, -np.inf, ())]}
    by_time: dict[float, list[Edge]] = {}
    for e in edges:
        by_time.setdefault(round(e.time, 12), []).append(e)
    for t in sorted(by_time):
        new = []
        for e in by_time[t]:
            for here in (e.n, e.k):
                for hops, order, arrival, path in labels.get(here, ()):
                    if arrival < e.time and here != target:
                        new.append((e.other(here), (hops + 1, max(order, e.order), e.time, path + (e,))))
        for state, label in new:
            bucket = labels.setdefault(state, [])
            if any(o[0] <= label[0] and o[1] <= label[1] and o[2] <= label[2] for o in bucket):
                continue
            bucket[:] = [
                o for o in bucket if not (label[0] <= o[0] and label[1] <= o[1] and label[2] <= o[2])
            ]
            bucket.append(label)
    finals = [lab for lab in labels.get(target, ()) if lab[3]]
    if not finals:
        return None
    return list(min(finals, key=lambda lab: lab[:3])[3])


def schedule_from_route(
    route: Route,
    omega0_per_hop: Union[None, float, Sequence[float]] = None,
    width: Optional[float] = None,
    separation: float = DEFAULT_SEPARATION,
) -> Schedule:
    """One Gaussian per hop, centred on the hop's crossing.

    ``None`` amplitudes/width fall back to each hop's recommended pulse.
    Raises :class:`ScheduleConflict` when pulses for different crossings
    overlap.
    """
    if not route.hops:
        return Schedule()
    n = len(route.hops)
    if omega0_per_hop is None or np.isscalar(omega0_per_hop):
        amps = [omega0_per_hop] * n
    else:
        amps = list(omega0_per_hop)
        if len(amps) != n:
            raise ValueError(f"need {n} amplitudes, got {len(amps)}")
    pulses = []
    for hop, amp in zip(route.hops, amps):
        base = hop.pulse or recommended_pulse(route.params, hop.edge)
        w = base.width if width is None else width
        pulses.append(gaussian(base.omega0 if amp is None else float(amp), hop.time, w))
    schedule = Schedule(tuple(pulses))
    report = validate_schedule(schedule, route.params, separation)
    if not report.passed:
        raise ScheduleConflict(f"pulses overlap: {report.to_dict()['pulses']}")
    return schedule


def wide_pulse_schedule(params: SystemParams, omega0: float, width: Optional[float] = None) -> Schedule:
    """Single Gaussian at t=0 whose width spans every crossing (|0> <-> |N>)."""
    span = (params.N - 1) * params.tau
    if width is None:
        width = span if span > 0 else params.tau
    if width < span:
        raise ValueError(f"width {width} does not cover crossings out to +-{span}")
    return Schedule((gaussian(omega0, 0.0, width),))


def effective_coupling_estimate(params: SystemParams, n: int, k: int, omega: float) -> float:
    """Order-of-magnitude scale ``(omega / (N xi)) ** |n - k|``."""
    q = abs(n - k)
    if q < 2:
        raise ValueError("estimate applies to multi-quantum pairs |n - k| >= 2")
    scale = params.N * params.xi
    if omega >= scale:
        raise RegimeError(f"omega={omega} >= N*xi={scale}: perturbative estimate invalid")
    return float((omega / scale) ** q)


def _grade(ratio: float, margin: float) -> str:
    if ratio >= margin:
        return "pass"
    return "marginal" if ratio >= 1 else "fail"


@dataclass
class AdiabaticityReport:
    edge: Edge
    omega_at_crossing: float
    effective_coupling: float
    coupling_ratio: float  # Omega_nk / sqrt(A)
    sweep_ratio: float  # sqrt(A) * T
    margin: float
    perturbative: bool
    coupling_status: str = field(init=False)
    sweep_status: str = field(init=False)

    def __post_init__(self):
        self.coupling_status = _grade(self.coupling_ratio, self.margin)
        self.sweep_status = _grade(self.sweep_ratio, self.margin)

    @property
    def passed(self) -> bool:
        return self.coupling_status == "pass" and self.sweep_status == "pass"

    def to_dict(self) -> dict:
        d = {k: v for k, v in vars(self).items() if k != "edge"}
        d["edge"] = self.edge.to_dict()
        d["passed"] = self.passed
        return d


def adiabaticity_check(
    params: SystemParams, edge: Edge, pulse: Pulse, margin: float = DEFAULT_MARGIN
) -> AdiabaticityReport:
    """Grade ``Omega_nk T >> sqrt(A) T >> 1`` at the crossing of ``edge``.

    Adjacent pairs use the direct Rabi factor; multi-quantum pairs use
    ``N xi (Omega / (N xi)) ** q``, saturating at ``N xi`` once
    ``Omega >= N xi`` where only numerics can decide (``perturbative=False``).
    """
    if abs(pulse.t0 - edge.time) > 2 * pulse.width:
        raise ValueError("pulse must be centred within two widths of the crossing")
    omega = float(pulse.envelope(edge.time))
    scale = params.N * params.xi
    perturbative = True
    if edge.order == 1:
        coupling = coupling_factor(params, edge.n) * omega
    else:
        perturbative = omega < scale
        coupling = scale * min(omega / scale, 1.0) ** edge.order
    sqrt_a = np.sqrt(params.A)
    return AdiabaticityReport(
        edge=edge,
        omega_at_crossing=omega,
        effective_coupling=float(coupling),
        coupling_ratio=float(coupling / sqrt_a),
        sweep_ratio=float(sqrt_a * pulse.width),
        margin=margin,
        perturbative=perturbative,
    )


def ghz_schedule(
    params: SystemParams,
    pulse: Pulse,
    rotation_time: Optional[float] = None,
    guard_widths: float = 2.0,
) -> Schedule:
    """pi/2 rotation on {|0>, |1>}, then ``pulse`` moved onto t_1N = xi/A.

    The rotation defaults to halfway between t_0N = 0 and t_1N; it must sit
    at least ``guard_widths`` pulse widths before t_1N and away from the
    crossings t_01 and t_0N.
    """
    N, tau = params.N, params.tau
    if N < 2:
        raise ValueError("GHZ sequence needs N >= 2")
    t1n = crossing_time(params, 1, N)
    if rotation_time is None:
        rotation_time = t1n / 2
    guard = guard_widths * pulse.width
    if rotation_time > t1n - guard:
        raise ScheduleConflict(f"rotation at {rotation_time} is within {guard} of t_1N={t1n}")
    for name, t in (("t_01", crossing_time(params, 0, 1)), ("t_0N", crossing_time(params, 0, N))):
        if abs(rotation_time - t) < guard:
            raise ScheduleConflict(f"rotation at {rotation_time} collides with {name}={t}")
    centred = pulse.shifted(t1n - pulse.t0)
    return Schedule((centred,), (Rotation(float(rotation_time), (0, 1), np.pi / 2),))


def run_ghz(params: SystemParams, schedule: Schedule, tol: float = 1e-10) -> dict:
    """Propagate the GHZ sequence from |0> and score it against (|0>+|N>)/sqrt(2)."""
    result = propagate(params, schedule, named_state(params, "product_down"), tol)
    ghz = named_state(params, "GHZ")
    final = result.final_state
    best, phase = phase_optimized_fidelity(ghz, final, component=params.N)
    return {
        "fidelity": fidelity(ghz, final),
        "phase_optimized_fidelity": best,
        "relative_phase": float(np.angle(final[params.N]) - np.angle(final[0])),
        "populations": result.final_populations.tolist(),
        "norm_drift": result.norm_drift,
        "result": result,
    }
