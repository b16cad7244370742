#!/usr/bin/env python3
"""Experiment runner: turns a parsed ExperimentConfig into CSV rows plus a run record.

CSV columns per kind:
    master, trajectories    time, observable, re, im, stderr
    spdm                    time, site, density
    collapse, kick          x, xprime, re, im
    rates-sweep             V, n_high, gamma_prime
"""

import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np

from . import continuum, rates, spdm
from .config import ExperimentConfig, Settings
from .dynamics import (DensityMatrix, EvolutionSpec, InvariantCheck, Tolerances, TrajectoryConfig,
                       coherence_operator, evolve_master, fit_exponential_decay, fock_state,
                       mcwf_sample, observable_series, observe, prepare_bloch_condensate,
                       superposition)
from .errors import CapacityError, InvalidArgument, NumericalFailure
from .lattice import (FockBasis, KickSpectrum, LatticeSpec, LocalizationKernel, SparseOperator,
                      build_basis, cm_position_operator, cm_velocity_operator, fock_dimension,
                      hopping_hamiltonian, kernel_jump_family, kick_spectrum_dissipator,
                      number_operator, site_jump_family, total_number_operator)
from .util import dump_json, write_csv

logger = logging.getLogger(__name__)

TIME_SERIES_COLUMNS = ('time', 'observable', 're', 'im', 'stderr')
SPDM_COLUMNS = ('time', 'site', 'density')
DENSITY_COLUMNS = ('x', 'xprime', 're', 'im')
SWEEP_COLUMNS = ('V', 'n_high', 'gamma_prime')

COLUMNS = {
    'master': TIME_SERIES_COLUMNS,
    'trajectories': TIME_SERIES_COLUMNS,
    'spdm': SPDM_COLUMNS,
    'collapse': DENSITY_COLUMNS,
    'kick': DENSITY_COLUMNS,
    'rates-sweep': SWEEP_COLUMNS,
}


@dataclass
class RunRecord:
    kind: str
    config: Dict[str, Any]
    config_hash: str
    seed: int
    columns: Tuple[str, ...]
    rows: List[Tuple] = field(default_factory=list)
    checks: List[InvariantCheck] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    duration: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[InvariantCheck]:
        for check in self.checks:
            if not check.passed:
                return check
        return None

    def to_json(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'duration': self.duration,
            'columns': list(self.columns),
            'row_count': len(self.rows),
            'checks': [c._asdict() for c in self.checks],
            'summary': self.summary,
            'config': self.config,
        }


def _check(name: str, value: float, tolerance: float, passed: bool) -> InvariantCheck:
    return InvariantCheck(name, float(value), float(tolerance), bool(passed))


def _tolerances(config: ExperimentConfig, settings: Settings) -> Tolerances:
    merged = dict(settings.tolerances)
    merged.update(config.tolerances)
    return Tolerances.from_mapping(merged)


def _kernel(value: Any) -> LocalizationKernel:
    if value == 'delta':
        return LocalizationKernel.delta()
    if value == 'three_point':
        return LocalizationKernel.three_point()
    return LocalizationKernel(tuple(value['offsets']), tuple(complex(a) for a in value['amplitudes']))


def _noise(params: Dict[str, Any]) -> rates.NoiseModel:
    block = params['noise']
    if 'spectrum' in block:
        return rates.NoiseModel.from_spectrum(block['tau_c'], block['spectrum'])
    if 'correlation' in block:
        return rates.NoiseModel.from_correlation(block['tau_c'], block['correlation'])
    raise InvalidArgument('NoiseWithoutValues(spectrum|correlation)')


class LatticeExperiment:
    """Basis, Hamiltonian, dissipators, initial state and observables of a master/trajectories run."""

    def __init__(self, params: Dict[str, Any], settings: Settings):
        sites, particles = params['sites'], params['particles']
        dim = fock_dimension(sites, particles)
        if dim > settings.dense_dimension_cap:
            raise CapacityError(sites, particles, dim, settings.dense_dimension_cap)
        self.params = params
        self.basis: FockBasis = build_basis(sites, particles, cap=settings.dimension_cap)
        if 'potential' in params:
            self.lattice = LatticeSpec(sites, params['hopping'], tuple(params['potential']), params['periodic'])
        elif 'curvature' in params:
            self.lattice = LatticeSpec.parabolic(sites, params['hopping'], params['curvature'], params['periodic'])
        else:
            self.lattice = LatticeSpec.uniform(sites, params['hopping'], params['periodic'])
        self.hamiltonian = hopping_hamiltonian(self.basis, self.lattice)
        self.dissipators, self.expected_damping = self._dissipators()
        logger.info(f'LatticeExperiment(M={sites},N={particles},dim={dim},jumps={params["jumps"]})')

    def _dissipators(self) -> Tuple[List[Tuple[float, SparseOperator]], Optional[float]]:
        params, basis = self.params, self.basis
        rate, jumps = params['rate'], params['jumps']
        if jumps == 'none':
            return [], None
        if jumps == 'site':
            return [(rate, op) for op in site_jump_family(basis)], rates.cm_damping_rate(rate)
        if jumps == 'kernel':
            kernel = _kernel(params.get('kernel', 'three_point'))
            family = kernel_jump_family(basis, kernel, self.lattice.periodic)
            return [(rate, op) for op in family], rates.cm_damping_rate(rate, kernel)
        if jumps == 'momentum':
            weights = params.get('kick_weights')
            spectrum = KickSpectrum.from_weights(weights) if weights else KickSpectrum.uniform(basis.sites)
            return kick_spectrum_dissipator(basis, spectrum, rate), None
        noise = _noise(params)
        return rates.noise_dissipator(noise, basis), rates.gamma_from_spectrum(noise)

    def spec(self) -> EvolutionSpec:
        p = self.params
        return EvolutionSpec(self.hamiltonian, tuple(self.dissipators), p['dt'], p['total_time'], p['record_every'])

    def initial_state(self) -> np.ndarray:
        initial = self.params['initial']
        if initial['type'] == 'bloch':
            return prepare_bloch_condensate(self.basis, initial.get('q', 1))
        if initial['type'] == 'fock':
            return fock_state(self.basis, initial['occupation'])
        return superposition(self.basis, initial['occupations'], initial.get('amplitudes'))

    def observable(self, label: str) -> SparseOperator:
        if label == 'v_cm':
            return cm_velocity_operator(self.basis, self.lattice)
        if label == 'x_cm':
            return cm_position_operator(self.basis)
        if label == 'n_total':
            return total_number_operator(self.basis)
        if label == 'energy':
            return self.hamiltonian
        return number_operator(self.basis, int(label[1:]))

    def observables(self) -> List[Tuple[str, SparseOperator]]:
        out = [(label, self.observable(label)) for label in self.params['observables']]
        for item in self.params['coherences']:
            label = 'rho[{}|{}]'.format('-'.join(map(str, item['row'])), '-'.join(map(str, item['col'])))
            out.append((label, coherence_operator(self.basis, item['row'], item['col'])))
        return out


def _damping_summary(times: np.ndarray, values: np.ndarray, expected: Optional[float]) -> Dict[str, Any]:
    summary: Dict[str, Any] = {}
    if expected is not None:
        summary['expected_damping'] = expected
    try:
        fit = fit_exponential_decay(times, np.real(values))
    except InvalidArgument as e:
        logger.info(f'DecayFitSkipped(reason={e})')
        return summary
    summary['fitted_damping'] = fit.rate
    summary['fit_residual'] = fit.residual
    return summary


def _run_master(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    experiment = LatticeExperiment(config.params, settings)
    tolerances = _tolerances(config, settings)
    psi0 = experiment.initial_state()
    series = evolve_master(DensityMatrix.from_pure(psi0, experiment.basis), experiment.spec(), tolerances)
    observables = experiment.observables()
    record = _record(config, [tuple(r) for r in observe(series, observables)])
    record.checks.extend(series[-1][1].checks(tolerances))
    record.summary['dim'] = experiment.basis.dim
    record.summary['snapshots'] = len(series)
    if 'v_cm' in config.params['observables'] and config.params['periodic']:
        times, values = observable_series(series, experiment.observable('v_cm'))
        record.summary.update(_damping_summary(times, values, experiment.expected_damping))
    return record


def _run_trajectories(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    params = config.params
    experiment = LatticeExperiment(params, settings)
    observables = experiment.observables()
    if 'n_total' not in params['observables']:
        observables.append(('n_total', experiment.observable('n_total')))
    trajectory_config = TrajectoryConfig(params['trajectories'], config.seed, params['dt'],
                                         threads or params['threads'])
    result = mcwf_sample(experiment.initial_state(), experiment.spec(), trajectory_config, observables)
    requested = {label for label, _ in experiment.observables()}
    record = _record(config, [tuple(r) for r in result.records() if r.observable in requested])

    number, _ = result.series('n_total')
    drift = float(np.max(np.abs(number - params['particles'])))
    record.checks.append(_check('particle_number', drift, 1e-9, drift <= 1e-9))
    record.summary['jumps'] = result.jumps
    record.summary['dim'] = experiment.basis.dim
    if 'v_cm' in params['observables'] and params['periodic']:
        mean, _ = result.series('v_cm')
        record.summary.update(_damping_summary(result.times, mean, experiment.expected_damping))
    return record


def _run_spdm(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    p = config.params
    trap = spdm.TrapSpec.parabolic(p['window'], p['hopping'], p['curvature'], p['rate'], p['periodic'])
    if p['initial'] == 'ground':
        state0 = spdm.ground_state_spdm(trap.with_rate(0.0), p['particles'], p['boundary_ratio'])
    elif p['initial'] == 'uniform':
        state0 = spdm.uniform_spdm(p['window'], p['particles'])
    else:
        state0 = spdm.plane_wave_spdm(p['window'], p['particles'], p['q'])
    tolerances = _tolerances(config, settings)
    steps = int(round(p['total_time'] / p['dt']))
    series = spdm.evolve_spdm(state0, trap, p['total_time'], p['dt'],
                              record_every=max(1, steps // p['snapshots']), trace_tolerance=tolerances.trace)

    rows = []
    reports = []
    for t, state in series:
        profile = spdm.density_profile(state)
        rows.extend((t, site, density) for site, density in enumerate(profile))
        try:
            report = spdm.flatness_report(profile)._asdict()
        except InvalidArgument:
            report = None
        reports.append({'time': t, 'energy': spdm.spdm_energy(state, trap),
                        'boundary_ratio': spdm.boundary_ratio(profile), 'flatness': report})
    record = _record(config, rows)
    record.checks.extend(series[-1][1].checks(tolerances.trace))
    record.summary['snapshots'] = reports
    worst = max(r['boundary_ratio'] for r in reports)
    if not p['periodic'] and worst >= 1e-6:
        logger.warning(f'WindowBoundaryDensity(max_ratio={worst:.3e},M_w={p["window"]})')
    return record


def _wavefunction(p: Dict[str, Any]) -> continuum.WavefunctionGrid:
    if 'psi_csv' in p:
        return continuum.read_wavefunction_csv(p['psi_csv'])
    return continuum.WavefunctionGrid.gaussian(p['sigma0'], p['points'], p.get('half_width'))


def _density_rows(rho: continuum.ContinuumDensityOperator, stride: int) -> List[Tuple]:
    picked = np.arange(0, rho.x.size, stride)
    rows = []
    for i in picked:
        for j in picked:
            value = rho.matrix[i, j]
            rows.append((rho.x[i], rho.x[j], value.real, value.imag))
    return rows


def _run_collapse(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    p = config.params
    psi = _wavefunction(p)
    shape = continuum.read_shape_csv(p['shape_csv']) if 'shape_csv' in p else continuum.CollapseShape.gaussian(p['width'])
    rho = continuum.collapse_density_operator(psi, shape)
    record = _record(config, _density_rows(rho, p['output_stride']))
    record.checks.extend(rho.checks())
    record.summary['purity'] = rho.purity()
    record.summary['probabilities'] = [
        {'x0': x0, 'p': continuum.collapse_probability(psi, shape, x0)} for x0 in p['positions']]
    if 'psi_csv' not in p and shape.is_gaussian:
        closed = continuum.gaussian_collapse_closed_form(p['sigma0'], shape.width)
        error = float(np.max(np.abs(rho.matrix - closed.density_matrix(rho.x).matrix)))
        record.checks.append(_check('closed_form', error, 1e-6, error <= 1e-6))
        record.summary['sigma'] = closed.sigma
    return record


def _run_kick(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    p = config.params
    psi = _wavefunction(p)
    if 'kicks_csv' in p:
        kicks = continuum.read_kicks_csv(p['kicks_csv'])
    else:
        k = p['kicks']
        points = k.get('points', continuum.DEFAULT_POINTS)
        if k['distribution'] == 'gaussian':
            kicks = continuum.KickDistribution.gaussian(k.get('width', 1.0), k.get('center', 0.0), points)
        else:
            kicks = continuum.KickDistribution.uniform(k.get('cutoff', 1.0), points)
    rho = continuum.kick_density_operator(psi, kicks)
    record = _record(config, _density_rows(rho, p['output_stride']))
    record.checks.extend(rho.checks())
    drift = float(np.max(np.abs(rho.diagonal() - psi.density())))
    record.checks.append(_check('diagonal_preserved', drift, 1e-12, drift <= 1e-12))
    record.summary['purity'] = rho.purity()
    record.summary['kick_spread'] = kicks.spread
    return record


def _run_rates(config: ExperimentConfig, settings: Settings, threads: int) -> RunRecord:
    p = config.params
    fit = rates.NHighFit(**p['n_high_fit'])
    mapping = rates.LatticeMapping(**p['mapping'])
    rows = rates.gamma_prime_sweep(p['depths'], mapping, fit, p['particles'], p['sites'])
    record = _record(config, [tuple(r) for r in rows])
    worst = max((abs(r.n_high - min(max(r.n_high, 0.0), 1.0)) for r in rows), default=0.0)
    record.checks.append(_check('n_high_range', worst, 0.0, worst == 0.0))
    lowest = min(r.gamma_prime for r in rows)
    record.checks.append(_check('gamma_prime_nonnegative', lowest, 0.0, lowest >= 0.0))
    if 'noise' in p:
        record.summary.update(noise_summary(_noise(p), p['interaction']))
        gap = record.summary['representation_gap']
        record.checks.append(_check('representations_agree', gap, 1e-10, gap <= 1e-10))
    return record


def noise_summary(noise: rates.NoiseModel, interaction: float = 1.0) -> Dict[str, float]:
    """gamma in both representations and gamma' = gamma / 2, labeled separately."""
    spectral = rates.gamma_from_spectrum(noise)
    realspace = rates.gamma_from_realspace(noise)
    scale = max(abs(spectral), 1.0)
    return {
        'gamma': spectral,
        'gamma_realspace': realspace,
        'gamma_prime': spectral / 2,
        'gamma_prime_density': rates.gamma_prime_general(noise, interaction),
        'representation_gap': abs(spectral - realspace) / scale,
    }


RUNNERS: Dict[str, Callable[[ExperimentConfig, Settings, int], RunRecord]] = {
    'master': _run_master,
    'trajectories': _run_trajectories,
    'spdm': _run_spdm,
    'collapse': _run_collapse,
    'kick': _run_kick,
    'rates-sweep': _run_rates,
}


def _record(config: ExperimentConfig, rows: List[Tuple]) -> RunRecord:
    return RunRecord(config.kind, config.resolved(), config.hash, config.seed, COLUMNS[config.kind], rows)


def run(config: ExperimentConfig, settings: Optional[Settings] = None, threads: Optional[int] = None) -> RunRecord:
    settings = settings if settings is not None else Settings()
    started = time.perf_counter()
    record = RUNNERS[config.kind](config, settings, threads or 0)
    record.duration = time.perf_counter() - started
    if not record.checks:
        raise NumericalFailure('no_checks', 0, math.nan)
    logger.info(f'Run(kind={config.kind},rows={len(record.rows)},passed={record.passed},'
                f'duration={record.duration:.3f}s)')
    return record


def emit_csv(record: RunRecord, path: str) -> None:
    write_csv(path, record.columns, record.rows)


def record_path(csv_path: str) -> str:
    return os.path.splitext(csv_path)[0] + '.json'


def write_record(record: RunRecord, path: str) -> None:
    with click.open_file(path, 'w', encoding='utf-8') as fd:
        dump_json(record.to_json(), fp=fd)


def ensure_passed(record: RunRecord) -> RunRecord:
    failure = record.first_failure()
    if failure is not None:
        raise NumericalFailure(failure.name, -1, failure.value)
    return record
