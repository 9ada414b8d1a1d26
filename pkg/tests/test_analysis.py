import numpy as np
import pytest

from spinnav import (
    BracketError,
    Pulse,
    Schedule,
    SystemParams,
    build_crossing_graph,
    gaussian,
    minimal_area,
    plan_route,
    scan_pulse_center,
    scaling_curve,
    schedule_from_route,
)
from spinnav import analysis
from spinnav.analysis import ScanResult, transfer_efficiency
from spinnav.dynamics import PropagationError
from spinnav.pulses import pulse_area

BASE = SystemParams(4, 20.0, 5.0)


def test_zero_field_scan():
    res = scan_pulse_center(BASE, gaussian(0.0, 0.0), [-12.0, 0.0, 4.0])
    assert np.allclose(res.populations[:, 0], 1.0)
    assert res.ok


def test_scan_parallel_matches_serial():
    grid = [-8.0, -4.0]
    a = scan_pulse_center(BASE, gaussian(50.0, 0.0), grid)
    b = scan_pulse_center(BASE, gaussian(50.0, 0.0), grid, workers=2)
    assert np.array_equal(a.populations, b.populations)


def test_scan_records_failures(monkeypatch):
    real = analysis.final_populations

    def flaky(params, schedule, psi0, tol):
        if schedule.pulses[0].t0 == 0.0:
            raise PropagationError("step size underflow", 0.0)
        return real(params, schedule, psi0, tol)

    monkeypatch.setattr(analysis, "final_populations", flaky)
    res = scan_pulse_center(BASE, gaussian(50.0, 0.0), [-4.0, 0.0, 4.0])
    assert [i for i, _ in res.errors] == [1]
    assert np.isnan(res.populations[1]).all()
    assert np.isfinite(res.populations[[0, 2]]).all()


def test_peak_and_plateau():
    values = np.linspace(0.0, 4.0, 5)
    pops = np.array([[0.1], [0.95], [0.97], [0.5], [0.92]])
    res = ScanResult(values, pops)
    assert res.peak(0) == (2.0, 0.97)
    assert res.plateau_width(0) == pytest.approx(2.0)
    assert res.plateau_width(0, level=0.99) == 0.0


def test_empty_schedule_efficiency():
    assert transfer_efficiency(BASE, Schedule(), 0, 3) == 0.0


@pytest.mark.parametrize("x", [0.5, 2.0])
def test_landau_zener_transfer(x):
    p = SystemParams(1, 1.0, 1.0)
    s = Schedule((Pulse("flattop", np.sqrt(x), 0.0, 6.25, duration=100.0),))
    assert transfer_efficiency(p, s, 0, 1) == pytest.approx(1 - np.exp(-np.pi * x / 2), abs=1e-4)


def test_sequential_transfer_pinned():
    route = plan_route(build_crossing_graph(BASE), 0, 4, "sequential")
    s = schedule_from_route(route, 50.0, 1.0)
    eff = transfer_efficiency(BASE, s, 0, 4)
    assert eff >= 0.9
    assert eff == pytest.approx(0.9985276642922702, abs=1e-6)


def test_minimal_area_trivial():
    assert minimal_area(BASE, source=1, target=1).area == 0.0


def test_minimal_area_n2():
    p = SystemParams(2, 20.0, 10.0)
    res = minimal_area(p)
    assert res.area == pytest.approx(4.534989345090285, rel=1e-6)
    assert res.area == pytest.approx(pulse_area(gaussian(res.omega0, 2.0, 1.0)))
    lo, hi = res.bracket
    assert hi - lo <= 0.01 * hi
    assert 0.9 <= res.efficiency <= 0.91
    evals = dict(res.evaluations)
    assert evals[lo] < 0.9


def test_minimal_area_bracket_error():
    with pytest.raises(BracketError):
        minimal_area(SystemParams(3, 20.0, 10.0), omega_cap=1.0, seed=0.1)


def test_scaling_curve_single_point():
    curve = scaling_curve(20.0, 10.0, [2])
    assert curve.N.tolist() == [2] and curve.ok
    assert curve.areas[0] == pytest.approx(4.534989345090285, rel=1e-6)


def test_scaling_curve_records_failures(monkeypatch):
    real = analysis.minimal_area

    def failing(params, **kw):
        if params.N == 3:
            raise BracketError("target efficiency not reached")
        return real(params, **kw)

    monkeypatch.setattr(analysis, "minimal_area", failing)
    curve = scaling_curve(20.0, 10.0, [2, 3])
    assert curve.errors == [(3, "target efficiency not reached")]
    assert np.isfinite(curve.areas[0]) and np.isnan(curve.areas[1])


def test_scaling_curve_requires_sorted():
    with pytest.raises(ValueError):
        scaling_curve(20.0, 10.0, [4, 2])
