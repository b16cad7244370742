import math

import numpy as np
import pytest

from locev import rates
from locev.dynamics import (DensityMatrix, EvolutionSpec, LindbladGenerator, Tolerances,
                            coherence_decay_factor, evolve_master, fit_exponential_decay,
                            lindblad_rhs, observable_series, observe, prepare_bloch_condensate)
from locev.errors import InvalidArgument, NumericalFailure
from locev.lattice import (LatticeSpec, LocalizationKernel, SparseOperator, build_basis,
                           cm_position_operator, cm_velocity_operator, hopping_hamiltonian, kernel_jump_family,
                           site_jump_family, total_number_operator)


def zero_hamiltonian(dim: int) -> SparseOperator:
    return SparseOperator.diagonal_of(np.zeros(dim))


def velocity_decay(sites, particles, dissipators, total_time=5.0, dt=0.01):
    basis = build_basis(sites, particles)
    lattice = LatticeSpec.uniform(sites, 1.0)
    spec = EvolutionSpec(hopping_hamiltonian(basis, lattice), tuple(dissipators(basis)), dt, total_time, 10)
    rho0 = DensityMatrix.from_pure(prepare_bloch_condensate(basis, 1), basis)
    series = evolve_master(rho0, spec)
    times, values = observable_series(series, cm_velocity_operator(basis, lattice))
    return times, values.real


def test_bloch_condensate_velocity():
    basis = build_basis(6, 2)
    lattice = LatticeSpec.uniform(6, 1.0)
    psi = prepare_bloch_condensate(basis, 1)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    v = np.vdot(psi, cm_velocity_operator(basis, lattice).apply(psi))
    assert abs(v - 2 * math.sin(2 * math.pi / 6)) < 1e-12


def test_coherence_decay_closed_form():
    sites, particles, rate = 3, 3, 0.2
    basis = build_basis(sites, particles)
    psi = np.ones(basis.dim, dtype=complex) / math.sqrt(basis.dim)
    rho0 = DensityMatrix.from_pure(psi, basis)
    spec = EvolutionSpec(zero_hamiltonian(basis.dim), tuple((rate, op) for op in site_jump_family(basis)),
                         dt=0.002, total_time=10.0, record_every=5000)
    series = evolve_master(rho0, spec)
    t, rho = series[-1]
    assert t == pytest.approx(10.0)
    for a, n in enumerate(basis.states):
        for b, nprime in enumerate(basis.states):
            expected = coherence_decay_factor(n, nprime, rate, t) / basis.dim
            assert abs(rho.matrix[a, b] - expected) <= 1e-8 * expected


def test_coherence_decay_factor():
    assert coherence_decay_factor((2, 3), (3, 2), 0.5, 1.0) == pytest.approx(math.exp(-1.0))
    with pytest.raises(InvalidArgument):
        coherence_decay_factor((1, 2), (1, 1, 1), 0.1, 1.0)


def test_site_local_velocity_damping():
    rate = 0.1
    times, values = velocity_decay(6, 2, lambda basis: [(rate, op) for op in site_jump_family(basis)])
    fit = fit_exponential_decay(times, values)
    assert fit.rate == pytest.approx(rates.cm_damping_rate(rate), rel=1e-3)
    assert fit.amplitude == pytest.approx(math.sqrt(3), rel=1e-6)


def test_kernel_velocity_damping():
    rate = 0.1
    kernel = LocalizationKernel.three_point()
    times, values = velocity_decay(6, 2, lambda basis: [(rate, op) for op in kernel_jump_family(basis, kernel)])
    fit = fit_exponential_decay(times, values)
    assert fit.rate == pytest.approx(0.585786 * rate, rel=1e-2)
    assert fit.rate == pytest.approx(rates.cm_damping_rate(rate, kernel), rel=1e-6)


def test_noise_dissipator_velocity_damping():
    noise = rates.NoiseModel.from_spectrum(0.2, [0.5, 1.0, 0.0, 0.3, 0.0, 1.0])
    expected = rates.gamma_from_spectrum(noise)
    assert expected == pytest.approx(0.8 / 6 * 0.8, rel=1e-12)
    times, values = velocity_decay(6, 1, lambda basis: rates.noise_dissipator(noise, basis), total_time=10.0)
    fit = fit_exponential_decay(times, values)
    assert fit.rate == pytest.approx(expected, rel=1e-2)


def test_trace_and_number_conserved():
    basis = build_basis(4, 2)
    lattice = LatticeSpec.parabolic(4, 1.0, 0.2, periodic=True)
    spec = EvolutionSpec(hopping_hamiltonian(basis, lattice), tuple((0.3, op) for op in site_jump_family(basis)),
                         dt=0.01, total_time=2.0, record_every=50)
    rho0 = DensityMatrix.from_pure(prepare_bloch_condensate(basis, 1), basis)
    series = evolve_master(rho0, spec)
    assert [round(t, 12) for t, _ in series] == [0.0, 0.5, 1.0, 1.5, 2.0]
    for record in observe(series, [('n_total', total_number_operator(basis))]):
        assert record.re == pytest.approx(2.0, abs=1e-9)
        assert abs(record.im) < 1e-12
    for _, rho in series:
        assert all(check.passed for check in rho.checks())


def test_rhs_trace_free():
    basis = build_basis(3, 2)
    spec = EvolutionSpec(hopping_hamiltonian(basis, LatticeSpec.uniform(3)),
                         tuple((0.2, op) for op in kernel_jump_family(basis, LocalizationKernel.three_point())))
    rho = DensityMatrix.from_pure(prepare_bloch_condensate(basis, 1), basis)
    drho = lindblad_rhs(spec, rho)
    assert abs(np.trace(drho)) < 1e-12
    np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)
    np.testing.assert_allclose(LindbladGenerator(spec)(rho.matrix), drho)


def test_invalid_initial_state_rejected():
    basis = build_basis(2, 1)
    spec = EvolutionSpec(zero_hamiltonian(basis.dim))
    with pytest.raises(NumericalFailure) as info:
        evolve_master(DensityMatrix(np.diag([0.7, 0.7]).astype(complex), basis), spec)
    assert info.value.invariant == 'trace'
    assert info.value.step == 0
    assert info.value.exit_code == 3


def test_tolerance_override():
    tolerances = Tolerances.from_mapping({'trace': '1e-3', 'unknown': 1})
    assert tolerances.trace == 1e-3
    assert tolerances.hermiticity == Tolerances().hermiticity


def test_evolution_spec_validation():
    zero = zero_hamiltonian(2)
    with pytest.raises(InvalidArgument, match='NegativeRate'):
        EvolutionSpec(zero, ((-0.1, zero),))
    with pytest.raises(InvalidArgument, match='InvalidTimeGrid'):
        EvolutionSpec(zero, dt=0.0)
    with pytest.raises(InvalidArgument, match='InvalidRecordInterval'):
        EvolutionSpec(zero, record_every=0)


@pytest.mark.parametrize('kernel', [LocalizationKernel.delta(), LocalizationKernel.three_point()])
def test_kernel_events_do_not_move_center_of_mass(kernel):
    basis = build_basis(4, 2)
    rng = np.random.default_rng(21)
    a = rng.normal(size=(basis.dim, basis.dim)) + 1j * rng.normal(size=(basis.dim, basis.dim))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    spec = EvolutionSpec(zero_hamiltonian(basis.dim), tuple((0.7, op) for op in kernel_jump_family(basis, kernel)))
    drift = np.trace(cm_position_operator(basis).dense() @ LindbladGenerator(spec)(rho))
    assert abs(drift) < 1e-12
