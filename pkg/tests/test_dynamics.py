import numpy as np
import pytest

from spinnav import (
    Pulse,
    Rotation,
    Schedule,
    SystemParams,
    energies,
    fidelity,
    gaussian,
    named_state,
    phase_optimized_fidelity,
    propagate,
    propagate_reference,
)
from spinnav.basis import basis_state
from spinnav.dynamics import as_state, sample_times

BASE = SystemParams(4, 20.0, 5.0)
LZ = SystemParams(1, 1.0, 1.0)
LZ_SCHEDULE = Schedule((Pulse("flattop", 1.0, 0.0, 1.0, duration=1000.0),), window=(-40.0, 40.0))


@pytest.mark.parametrize("n", [0, 2, 4])
def test_free_evolution_phases(n):
    s = Schedule(window=(-3.0, 5.0))
    ts = np.linspace(-3.0, 5.0, 9)
    r = propagate(BASE, s, basis_state(BASE, n), times=ts)
    assert np.allclose(r.populations[:, n], 1.0, atol=1e-14)
    # integral of E_n(t) = m^2 xi t - m A t^2 / 2
    m = n - 2
    phase = m * m * BASE.xi * (ts + 3.0) - m * BASE.A * (ts**2 - 9.0) / 2
    assert np.allclose(r.amplitudes[:, n], np.exp(-1j * phase), atol=1e-10)


def test_free_evolution_reference_phases():
    s = Schedule(window=(-3.0, 5.0))
    psi0 = np.ones(5) / np.sqrt(5)
    a = propagate(BASE, s, psi0)
    b = propagate_reference(BASE, s, psi0, dt=0.5)
    assert np.allclose(a.final_state, b.final_state, atol=1e-10)


def test_landau_zener_window():
    r = propagate(LZ, LZ_SCHEDULE, basis_state(LZ, 0))
    assert r.final_populations[0] == pytest.approx(np.exp(-np.pi / 2), abs=5e-3)


def test_reference_matches_adaptive_lz():
    ts = np.linspace(-40.0, 40.0, 81)
    a = propagate(LZ, LZ_SCHEDULE, basis_state(LZ, 0), tol=1e-10, times=ts)
    b = propagate_reference(LZ, LZ_SCHEDULE, basis_state(LZ, 0), dt=1e-3, times=ts)
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) <= 1e-6
    assert b.norm_drift <= 1e-12


def test_reference_dt_validation():
    with pytest.raises(ValueError):
        propagate_reference(LZ, LZ_SCHEDULE, basis_state(LZ, 0), dt=100.0)
    with pytest.raises(ValueError):
        propagate_reference(LZ, LZ_SCHEDULE, basis_state(LZ, 0), dt=0.0)


def test_transfer_at_t04():
    r = propagate(BASE, Schedule((gaussian(50.0, 0.0, 1.0),)), basis_state(BASE, 0))
    assert r.final_populations[4] > 0.9
    assert r.final_populations[4] == pytest.approx(0.998969, abs=1e-5)
    assert r.norm_drift <= 1e-8


def test_sampling_includes_window_edges():
    s = Schedule((gaussian(50.0, 0.0, 1.0),))
    ts = sample_times(s.resolved_window(BASE), s)
    assert ts[0] == -20.0 and ts[-1] == 20.0
    assert np.max(np.diff(ts)) <= 0.1 + 1e-12


def test_rotation_during_evolution():
    s = Schedule(rotations=(Rotation(0.0, (0, 1), np.pi / 2),), window=(-1.0, 1.0))
    r = propagate(BASE, s, basis_state(BASE, 0), times=np.array([-1.0, 0.0, 1.0]))
    assert np.allclose(r.populations[1, :2], [0.5, 0.5])


def test_rotation_outside_window():
    s = Schedule(rotations=(Rotation(0.0, (0, 1)),), window=(-1.0, 1.0))
    with pytest.raises(ValueError):
        propagate(BASE, s, basis_state(BASE, 0), times=np.array([-1.0, -0.5]))


def test_invalid_initial_state():
    with pytest.raises(ValueError):
        as_state(np.ones(5), 5)
    with pytest.raises(ValueError):
        as_state(np.array([1.0, 0.0]), 5)


def test_fidelity_examples():
    ghz = named_state(BASE, "GHZ")
    e0, e4 = basis_state(BASE, 0), basis_state(BASE, 4)
    assert fidelity(ghz, ghz) == pytest.approx(1.0)
    assert fidelity(e0, e4) == 0.0
    psi = (e0 + 1j * e4) / np.sqrt(2)
    assert fidelity(psi, ghz) == pytest.approx(0.5)
    best, phase = phase_optimized_fidelity(ghz, psi)
    assert best == pytest.approx(1.0)
    assert phase == pytest.approx(np.pi / 2)


@pytest.mark.parametrize("t0", [-10.0, -6.0, -4.0])
def test_mirror_identity_transposed(t0):
    # Real H and H(-t) = P H(t) P with P: n -> N - n give U(-T0) = P U(T0)^T P,
    # so P(e_N -> e_{N-k} | -T0) = P(e_k -> e_0 | T0).
    N = BASE.N
    fwd = Schedule((gaussian(50.0, t0, 1.0),))
    bwd = Schedule((gaussian(50.0, -t0, 1.0),))
    mirrored = propagate(BASE, bwd, basis_state(BASE, N)).final_populations
    for k in range(N + 1):
        direct = propagate(BASE, fwd, basis_state(BASE, k)).final_populations[0]
        assert mirrored[N - k] == pytest.approx(direct, abs=1e-6)


def test_energies_on_diagonal_model():
    from spinnav.dynamics import schedule_model

    model = schedule_model(BASE, Schedule())
    assert np.allclose(np.diag(model.matrix(2.0)), energies(BASE, 2.0))
