import math

import numpy as np
import pytest

from locev.errors import InvalidArgument, NumericalFailure
from locev.spdm import (SPDMatrix, TrapSpec, boundary_ratio, density_profile, evolve_spdm,
                        flatness_report, flattening_comparison, flattening_experiment, flattening_snapshot_times,
                        ground_state_spdm, off_diagonal_weight,
                        plane_wave_spdm, site_positions, spdm_energy, spdm_rhs, uniform_spdm)


def test_trap_validation():
    with pytest.raises(InvalidArgument, match='EvenWindow'):
        TrapSpec.parabolic(10, 1.0, 0.1)
    with pytest.raises(InvalidArgument, match='NegativeRate'):
        TrapSpec.parabolic(11, 1.0, 0.1, rate=-1)
    with pytest.raises(InvalidArgument, match='PotentialLengthMismatch'):
        TrapSpec(3, 1.0, (0.0, 0.0))
    np.testing.assert_allclose(site_positions(5), [-2, -1, 0, 1, 2])


def test_hamiltonian_ring_and_wall():
    wall = TrapSpec.parabolic(5, 1.0, 0.0).hamiltonian()
    ring = TrapSpec.parabolic(5, 1.0, 0.0, periodic=True).hamiltonian()
    assert wall[0, 4] == 0
    assert ring[0, 4] == -1.0
    np.testing.assert_allclose(ring, ring.T)


def test_ground_state_is_stationary():
    trap = TrapSpec.parabolic(31, 1.0, 0.1)
    state = ground_state_spdm(trap, particles=3)
    assert np.trace(state.matrix).real == pytest.approx(3.0)
    assert np.max(np.abs(spdm_rhs(state, trap))) < 1e-10
    series = evolve_spdm(state, trap, total_time=1.0, dt=0.01, record_every=50)
    np.testing.assert_allclose(series[-1][1].matrix, state.matrix, atol=1e-9)


def test_ground_state_window_too_small():
    trap = TrapSpec.parabolic(7, 1.0, 0.01)
    with pytest.raises(InvalidArgument, match='WindowTooSmall'):
        ground_state_spdm(trap, 1)
    state = ground_state_spdm(trap, 1, max_boundary_ratio=None)
    assert boundary_ratio(density_profile(state)) > 1e-8


def test_plane_wave_dephasing_closed_form():
    sites, particles, rate = 9, 2.0, 0.3
    trap = TrapSpec.parabolic(sites, 1.0, 0.0, rate=rate, periodic=True)
    state0 = plane_wave_spdm(sites, particles, 0)
    assert spdm_energy(state0, trap) == pytest.approx(-2 * particles)
    series = evolve_spdm(state0, trap, total_time=2.0, dt=0.01, record_every=20)
    weights = [off_diagonal_weight(state) for _, state in series]
    assert all(b < a for a, b in zip(weights, weights[1:]))
    for t, state in series:
        decay = math.exp(-2 * rate * t)
        assert off_diagonal_weight(state) == pytest.approx(particles ** 2 * decay ** 2 * (1 - 1 / sites), rel=1e-8)
        assert spdm_energy(state, trap) == pytest.approx(-2 * particles * decay, rel=1e-8)
        np.testing.assert_allclose(density_profile(state), particles / sites, atol=1e-12)


def test_ring_reaches_homogeneous_state():
    rate = 0.5
    trap = TrapSpec.parabolic(11, 1.0, 0.1, rate=rate, periodic=True)
    state0 = ground_state_spdm(trap.with_rate(0.0), particles=1)
    assert np.ptp(density_profile(state0)) > 0.05
    series = evolve_spdm(state0, trap, total_time=50 / rate, dt=0.01, record_every=10000)
    profile = density_profile(series[-1][1])
    assert np.ptp(profile) < 1e-6
    assert profile.sum() == pytest.approx(1.0, abs=1e-9)


def test_uniform_state_is_fixed_point():
    trap = TrapSpec.parabolic(7, 1.0, 0.3, rate=1.0)
    state = uniform_spdm(7, 4)
    assert np.max(np.abs(spdm_rhs(state, trap))) == 0.0


def test_evolution_rejects_invalid_state():
    trap = TrapSpec.parabolic(3, 1.0, 0.0)
    bad = SPDMatrix(np.eye(3, dtype=complex), particles=2.0)
    with pytest.raises(NumericalFailure) as info:
        evolve_spdm(bad, trap, 1.0, 0.1)
    assert info.value.invariant == 'trace'
    with pytest.raises(InvalidArgument, match='DimensionMismatch'):
        evolve_spdm(uniform_spdm(5, 1), trap, 1.0, 0.1)
    with pytest.raises(InvalidArgument, match='InvalidTimeGrid'):
        evolve_spdm(uniform_spdm(3, 1), trap, 1.0, 0.0)


def test_flatness_of_gaussian():
    x = site_positions(41)
    report = flatness_report(np.exp(-x ** 2 / 18))
    assert report.variance == pytest.approx(9.0, rel=1e-6)
    assert report.kurtosis == pytest.approx(3.0, rel=1e-6)
    assert report.matched_variance == pytest.approx(9.0, rel=1e-8)


def test_flatness_of_rectangle():
    profile = np.zeros(103)
    profile[1:-1] = 1.0
    report = flatness_report(profile)
    assert report.variance == pytest.approx(850.0)
    assert report.kurtosis == pytest.approx(1.799765, abs=1e-6)
    assert math.isinf(report.matched_variance)


def test_flatness_errors():
    with pytest.raises(InvalidArgument, match='NoInteriorMaximum'):
        flatness_report([3.0, 2.0, 1.0])
    with pytest.raises(InvalidArgument, match='TooFewCentralPoints'):
        flatness_report([0.0, 0.1, 1.0, 0.1, 0.0])


@pytest.mark.slow
def test_flattening_run():
    run = flattening_experiment()
    assert len(run.series) == 11
    assert run.series[-1][0] == pytest.approx(4.0)
    for _, state in run.series:
        assert abs(np.trace(state.matrix).real - 1.0) <= 1e-9
    kurtosis = [report.kurtosis for report in run.reports]
    assert all(b < a for a, b in zip(kurtosis, kurtosis[1:]))
    assert kurtosis[-1] < 3
    final = run.reports[-1]
    assert final.matched_variance > final.variance
    assert max(run.boundary) < 1e-6


def test_flattening_snapshot_times():
    assert flattening_snapshot_times(0.5, 1.0) == (4.0, 16.0)
    with pytest.raises(InvalidArgument):
        flattening_snapshot_times(0.0)


@pytest.mark.slow
def test_flattening_comparison_keeps_heating():
    short, long = flattening_comparison()
    assert short.series[-1][0] == pytest.approx(4.0)
    assert long.series[-1][0] == pytest.approx(16.0)
    for run in (short, long):
        state = run.series[-1][1]
        assert abs(np.trace(state.matrix).real - 1.0) <= 1e-9
    assert spdm_energy(long.series[-1][1], long.trap) > spdm_energy(short.series[-1][1], short.trap)
