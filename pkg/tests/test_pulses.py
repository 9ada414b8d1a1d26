import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from spinnav import Pulse, Rotation, Schedule, SystemParams, gaussian, pulse_area, validate_schedule
from spinnav.pulses import amplitude

BASE = SystemParams(4, 20.0, 5.0)


def test_gaussian_amplitude():
    s = Schedule((gaussian(50.0, 3.0, 1.0),))
    assert amplitude(s, 3.0) == pytest.approx(50.0)
    assert amplitude(s, 4.0) == pytest.approx(50.0 / np.e)
    assert amplitude(Schedule(), 1.0) == 0.0


def test_amplitude_sums_pulses():
    s = Schedule((gaussian(1.0, 0.0), gaussian(2.0, 10.0)))
    assert amplitude(s, 10.0) == pytest.approx(2.0 + np.exp(-100))


def test_truncation():
    p = gaussian(1.0, 0.0, 2.0)
    assert p.support() == (-16.0, 16.0)
    assert p.envelope(16.5) == 0.0


def test_areas():
    assert pulse_area(gaussian(1.0, 0.0, 1.0)) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert pulse_area(gaussian(50.0, 0.0, 1.0)) == pytest.approx(50 * np.sqrt(np.pi), rel=1e-12)
    assert pulse_area(gaussian(0.0, 0.0, 1.0)) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["gaussian", "flattop"]), st.floats(0, 100), st.floats(0.1, 5), st.floats(0, 20))
def test_area_matches_quadrature(shape, omega0, width, duration):
    p = Pulse(shape, omega0, 1.0, width, duration if shape == "flattop" else 0.0)
    lo, hi = p.support()
    ref, _ = integrate.quad(p.envelope, lo, hi, points=[p.t0], limit=200)
    assert pulse_area(p) == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_tabulated_pulse():
    p = Pulse("tabulated", 2.0, 5.0, 1.0, samples=([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]))
    assert p.envelope(5.0) == pytest.approx(2.0)
    assert p.envelope(5.5) == pytest.approx(1.0)
    assert p.envelope(7.0) == 0.0
    assert pulse_area(p) == pytest.approx(2.0)
    assert Pulse.from_dict(p.to_dict()) == p


@pytest.mark.parametrize(
    "kw",
    [dict(shape="square"), dict(omega0=-1.0), dict(width=0.0), dict(shape="tabulated"),
     dict(shape="tabulated", samples=([1.0, 0.0], [0.0, 1.0]))],
)
def test_pulse_validation(kw):
    with pytest.raises(ValueError):
        Pulse(**kw)


def test_rotation_half_angle():
    r = Rotation(0.0, (0, 1), np.pi / 2)
    out = r.apply(np.array([1, 0, 0], dtype=complex))
    assert np.allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2), 0])
    with pytest.raises(ValueError):
        Rotation(0.0, (1, 1))
    with pytest.raises(ValueError):
        Rotation(0.0, (0, 1), 7.0)


def test_schedule_roundtrip():
    s = Schedule(
        (gaussian(1.0, -2.0), Pulse("flattop", 3.0, 1.0, 0.5, 4.0)),
        (Rotation(0.5, (0, 2), 1.0),),
        (-30.0, 30.0),
    )
    assert Schedule.from_dict(s.to_dict()) == s


def test_resolved_window():
    s = Schedule((gaussian(50.0, 0.0, 1.0),))
    assert s.resolved_window(BASE) == (-20.0, 20.0)
    assert s.with_window((-1.0, 1.0)).resolved_window(BASE) == (-1.0, 1.0)
    with pytest.raises(ValueError):
        s.with_window((2.0, 3.0))


def test_validate_unit_width_marginal():
    rep = validate_schedule(Schedule((gaussian(50.0, 0.0, 1.0),)), BASE)
    assert rep.pulses[0].width_ratio == pytest.approx(0.25)
    assert rep.pulses[0].status == "marginal"
    assert rep.passed and not rep.strict


def test_validate_wide():
    rep = validate_schedule(Schedule((gaussian(10.0, 0.0, 10 * BASE.tau),)), BASE)
    assert rep.pulses[0].status == "wide"


def test_validate_empty():
    rep = validate_schedule(Schedule(), BASE)
    assert rep.passed and rep.pulses == []


def test_validate_overlap():
    s = Schedule((gaussian(10.0, 0.0, 0.8), gaussian(10.0, 1.0, 0.8)))
    rep = validate_schedule(s, BASE)
    assert not rep.passed
    assert rep.pulses[0].overlaps == [1]
