import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinnav import (
    RegimeError,
    RouteInfeasible,
    ScheduleConflict,
    SystemParams,
    adiabaticity_check,
    build_crossing_graph,
    effective_coupling_estimate,
    gaussian,
    ghz_schedule,
    plan_route,
    propagate,
    schedule_from_route,
    wide_pulse_schedule,
)
from spinnav.basis import basis_state
from spinnav.navigator import Hop, Route, recommended_pulse

BASE = SystemParams(4, 20.0, 5.0)
GRAPH = build_crossing_graph(BASE)


def hops(route):
    return [(h.edge.n, h.edge.k, h.time) for h in route.hops]


def test_graph_n4():
    assert len(GRAPH.edges) == 10
    assert GRAPH.distinct_times().tolist() == [-12.0, -8.0, -4.0, 0.0, 4.0, 8.0, 12.0]


def test_graph_two_level():
    g = build_crossing_graph(SystemParams(1, 3.0, 2.0))
    assert [(e.n, e.k, e.time) for e in g.edges] == [(0, 1, 0.0)]


def test_n_invariant_edges():
    flagged = {(e.n, e.k): e.time for e in GRAPH.edges if e.n_invariant}
    assert flagged == {
        (0, 4): 0.0, (1, 4): 4.0, (2, 4): 8.0, (3, 4): 12.0,
        (0, 1): -12.0, (0, 2): -8.0, (0, 3): -4.0,
    }


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.floats(0.1, 50), st.floats(0.1, 50))
def test_invariant_offsets_do_not_depend_on_n(N, xi, A):
    p = SystemParams(N, xi, A)
    for e in build_crossing_graph(p).edges:
        if e.n_invariant:
            assert e.time == pytest.approx(e.invariant_offset * p.tau, abs=1e-9 * p.tau * N)
            if e.k == N:
                assert e.invariant_offset == e.n
            else:
                assert e.invariant_offset == -(N - e.k)


def test_sequential_route():
    # adjacent crossings t_{n,n+1} = (2n + 1 - N) xi/A
    r = plan_route(GRAPH, 0, 4, "sequential")
    assert hops(r) == [(0, 1, -12.0), (1, 2, -4.0), (2, 3, 4.0), (3, 4, 12.0)]
    assert r.max_order == 1 and r.completion_time == 12.0


def test_direct_route():
    r = plan_route(GRAPH, 0, 1, "direct")
    assert hops(r) == [(0, 1, -12.0)]
    s = schedule_from_route(r)
    assert [p.t0 for p in s.pulses] == [-12.0]


def test_invariant_route():
    r = plan_route(GRAPH, 4, 1, require_N_invariant=True)
    assert hops(r) == [(1, 4, 4.0)]
    assert r.n_invariant


def test_shortest_prefers_fewest_hops():
    assert len(plan_route(GRAPH, 0, 4).hops) == 1


def test_infeasible_invariant_route():
    with pytest.raises(RouteInfeasible):
        plan_route(GRAPH, 1, 2, require_N_invariant=True, max_order=1)


def test_descending_sequential_is_infeasible():
    # the adjacent crossings of 4 -> 0 occur in decreasing time order
    with pytest.raises(RouteInfeasible):
        plan_route(GRAPH, 4, 0, "sequential")


def test_unknown_strategy():
    with pytest.raises(ValueError):
        plan_route(GRAPH, 0, 4, "fastest")


def test_route_validation():
    e01, e12 = GRAPH.edge(0, 1), GRAPH.edge(1, 2)
    with pytest.raises(ValueError):
        Route(BASE, 0, 2, (Hop(e12, 1, 2),))
    with pytest.raises(ValueError):
        Route(BASE, 0, 2, (Hop(e12, 2, 1), Hop(e01, 1, 0)))


def test_empty_route_schedule():
    r = Route(BASE, 2, 2)
    assert schedule_from_route(r).pulses == ()


def test_schedule_conflict():
    r = plan_route(GRAPH, 0, 4, "sequential")
    with pytest.raises(ScheduleConflict):
        schedule_from_route(r, 50.0, 4.0)


def test_recommended_pulse():
    p = recommended_pulse(BASE, GRAPH.edge(0, 1))
    assert p.t0 == -12.0 and p.width == pytest.approx(0.8)
    assert p.omega0 * 2 / np.sqrt(BASE.A) == pytest.approx(5.0)


def test_wide_pulse_schedule():
    s = wide_pulse_schedule(BASE, 10.0)
    assert s.pulses[0].t0 == 0.0 and s.pulses[0].width == pytest.approx(12.0)
    with pytest.raises(ValueError):
        wide_pulse_schedule(BASE, 10.0, width=2.0)


def test_adiabaticity_first_crossing():
    rep = adiabaticity_check(BASE, GRAPH.edge(0, 1), gaussian(50.0, -12.0, 1.0))
    assert rep.effective_coupling == pytest.approx(100.0)
    assert rep.coupling_ratio == pytest.approx(100 / np.sqrt(5))
    assert rep.sweep_ratio == pytest.approx(np.sqrt(5))
    assert rep.coupling_status == "pass" and rep.sweep_status == "marginal"
    assert not rep.passed


def test_adiabaticity_zero_field():
    rep = adiabaticity_check(BASE, GRAPH.edge(0, 1), gaussian(0.0, -12.0, 10.0))
    assert rep.coupling_status == "fail" and not rep.passed


def test_adiabaticity_multi_quantum():
    rep = adiabaticity_check(BASE, GRAPH.edge(0, 4), gaussian(5.0, 0.0, 10.0))
    assert rep.perturbative
    assert rep.effective_coupling == pytest.approx(80.0 * (5.0 / 80.0) ** 4)
    assert rep.coupling_status == "fail"


def test_adiabaticity_off_crossing():
    with pytest.raises(ValueError):
        adiabaticity_check(BASE, GRAPH.edge(0, 1), gaussian(50.0, 0.0, 1.0))


def test_effective_coupling():
    p = SystemParams(4, 1.0, 1.0)
    assert effective_coupling_estimate(p, 0, 3, 0.4) == pytest.approx(1e-3)
    assert effective_coupling_estimate(p, 0, 2, 0.0) == 0.0
    assert effective_coupling_estimate(p, 0, 4, 2.0) == pytest.approx(0.0625)
    with pytest.raises(RegimeError):
        effective_coupling_estimate(p, 0, 4, 4.0)
    with pytest.raises(ValueError):
        effective_coupling_estimate(p, 0, 1, 0.1)


def test_ghz_schedule_layout():
    s = ghz_schedule(BASE, gaussian(60.0, 0.0, 1.0))
    assert s.pulses[0].t0 == pytest.approx(4.0)
    r = s.rotations[0]
    assert r.t == pytest.approx(2.0) and r.subspace == (0, 1)
    # with the field off the state right after the rotation is (e_0 + e_1)/sqrt(2)
    s = ghz_schedule(BASE, gaussian(0.0, 0.0, 1.0))
    res = propagate(BASE, s, basis_state(BASE, 0), times=np.array([-20.0, 2.0, 20.0]))
    mid = res.amplitudes[1]
    assert np.abs(mid[:2]) ** 2 == pytest.approx([0.5, 0.5], abs=1e-9)


@pytest.mark.parametrize("t", [3.5, 0.5, -12.0])
def test_ghz_rotation_conflicts(t):
    with pytest.raises(ScheduleConflict):
        ghz_schedule(BASE, gaussian(60.0, 0.0, 1.0), rotation_time=t)
