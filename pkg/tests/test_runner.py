import io
import json

import pytest

from locev import runner
from locev.config import Settings, parse_config
from locev.dynamics import InvariantCheck
from locev.errors import CapacityError, NumericalFailure
from locev.rates import NoiseModel
from locev.util import dump_json


def config(kind, seed=None, **params):
    doc = {'schema': 1, 'kind': kind, 'params': params}
    if seed is not None:
        doc['seed'] = seed
    return parse_config(json.dumps(doc))


def test_master_rows_and_damping():
    record = runner.run(config('master', sites=3, particles=2, total_time=1.0, rate=0.1,
                               coherences=[{'row': [2, 0, 0], 'col': [1, 1, 0]}]))
    assert record.passed
    assert record.columns == ('time', 'observable', 're', 'im', 'stderr')
    assert len(record.rows) == 11 * 2
    assert {row[1] for row in record.rows} == {'v_cm', 'rho[2-0-0|1-1-0]'}
    assert record.summary['dim'] == 6
    assert record.summary['expected_damping'] == pytest.approx(0.2)
    assert record.summary['fitted_damping'] == pytest.approx(0.2, rel=1e-6)


def test_master_kernel_and_momentum_jumps():
    kernel = runner.run(config('master', sites=4, particles=1, total_time=0.5, rate=0.2, jumps='kernel'))
    assert kernel.summary['expected_damping'] == pytest.approx(0.2 * 0.585786437626905)
    momentum = runner.run(config('master', sites=4, particles=1, total_time=0.5, rate=0.2, jumps='momentum',
                                 kick_weights=[1, 2, 2, 1], observables=['n0', 'n_total', 'energy']))
    assert momentum.passed
    assert 'expected_damping' not in momentum.summary


def test_master_noise_jumps():
    record = runner.run(config('master', sites=6, particles=1, total_time=1.0, jumps='noise',
                               noise={'tau_c': 0.2, 'spectrum': [0.5, 1.0, 0.0, 0.3, 0.0, 1.0]}))
    assert record.summary['expected_damping'] == pytest.approx(0.8 / 6 * 0.8)
    assert record.summary['fitted_damping'] == pytest.approx(record.summary['expected_damping'], rel=1e-2)


def test_dense_capacity():
    with pytest.raises(CapacityError) as info:
        runner.run(config('master', sites=7, particles=7, total_time=1.0))
    assert str(info.value) == 'CapacityExceeded(M=7,N=7,dim=1716,cap=1000)'
    assert info.value.exit_code == 4


def test_settings_lower_the_cap(tmp_path):
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps({'dense_dimension_cap': 5}))
    with pytest.raises(CapacityError):
        runner.run(config('master', sites=3, particles=2, total_time=1.0), Settings(str(path)))


def test_trajectories_reproducible():
    cfg = config('trajectories', seed=42, sites=3, particles=1, total_time=0.5, rate=0.2, trajectories=20,
                 record_every=10)
    first = runner.run(cfg)
    second = runner.run(cfg, threads=3)
    assert first.passed
    assert [c.name for c in first.checks] == ['particle_number']
    assert first.summary['jumps'] == second.summary['jumps']
    assert [row[:2] for row in first.rows] == [row[:2] for row in second.rows]
    for a, b in zip(first.rows, second.rows):
        assert a[2:] == pytest.approx(b[2:], rel=1e-12, abs=1e-15)
    assert {row[1] for row in first.rows} == {'v_cm'}
    other = runner.run(cfg.replace(seed=43))
    assert other.config_hash != first.config_hash


def test_spdm_run():
    record = runner.run(config('spdm', window=21, total_time=1.0, snapshots=4))
    assert record.passed
    assert record.columns == ('time', 'site', 'density')
    assert len(record.rows) == 5 * 21
    snapshots = record.summary['snapshots']
    assert len(snapshots) == 5
    assert snapshots[-1]['energy'] > snapshots[0]['energy']
    assert snapshots[0]['flatness']['kurtosis'] > snapshots[-1]['flatness']['kurtosis']
    assert {c.name: c.tolerance for c in record.checks} == {'trace': 1e-9, 'hermiticity': 1e-12, 'diagonal': -1e-10}


def test_spdm_uniform_start_on_ring():
    record = runner.run(config('spdm', window=5, total_time=0.1, initial='uniform', periodic=True))
    assert record.passed
    assert all(row[2] == pytest.approx(0.2) for row in record.rows)


def test_collapse_run():
    record = runner.run(config('collapse', width=0.5, positions=[0.0, 1.0]))
    assert record.passed
    assert [c.name for c in record.checks] == ['trace', 'hermiticity', 'diagonal', 'closed_form']
    assert len(record.rows) == 128 * 128
    assert record.summary['sigma'] == pytest.approx(1.25 ** 0.5)
    assert len(record.summary['probabilities']) == 2


def test_kick_run():
    record = runner.run(config('kick', kicks={'distribution': 'uniform', 'cutoff': 2.0}, output_stride=16))
    assert record.passed
    assert len(record.rows) == 64 * 64
    assert record.summary['kick_spread'] == pytest.approx(2 / 3 ** 0.5, rel=1e-5)


def test_rates_sweep_with_noise():
    record = runner.run(config('rates-sweep', depths=[2.0, 4.0], noise={'tau_c': 1.0, 'correlation': [1.0, 0.25, 0.25]}))
    assert record.passed
    assert record.columns == ('V', 'n_high', 'gamma_prime')
    assert [row[0] for row in record.rows] == [2.0, 4.0]
    assert record.summary['gamma'] == pytest.approx(1.5)
    assert record.summary['gamma_prime'] == pytest.approx(0.75)
    assert 'representations_agree' in [c.name for c in record.checks]


def test_noise_summary_labels_gamma_prime():
    summary = runner.noise_summary(NoiseModel.flat(8, 0.5, 1.3))
    assert summary['gamma'] == pytest.approx(1.3)
    assert summary['gamma_realspace'] == pytest.approx(1.3)
    assert summary['gamma_prime'] == pytest.approx(0.65)
    assert summary['representation_gap'] < 1e-12


def test_csv_and_record_files(tmp_path):
    record = runner.run(config('rates-sweep', depths=[2.0, 4.0]))
    path = tmp_path / 'sweep.csv'
    runner.emit_csv(record, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == 'V,n_high,gamma_prime'
    depth, n_high, _ = lines[1].split(',')
    assert depth == '2'
    assert float(n_high) == pytest.approx(0.0536)
    json_path = runner.record_path(str(path))
    assert json_path.endswith('sweep.json')
    runner.write_record(record, json_path)
    saved = json.loads((tmp_path / 'sweep.json').read_text())
    assert saved['config_hash'] == record.config_hash
    assert saved['row_count'] == 2
    assert saved['config']['params']['depths'] == [2.0, 4.0]


def test_record_serializes_non_finite_values():
    record = runner.run(config('spdm', window=5, total_time=0.1, initial='uniform', periodic=True))
    out = io.StringIO()
    dump_json(record.to_json(), fp=out)
    assert json.loads(out.getvalue())['kind'] == 'spdm'


def test_ensure_passed():
    record = runner.RunRecord('collapse', {}, 'x', 0, ('x',),
                              checks=[InvariantCheck('trace', 0.1, 1e-6, False)])
    assert not record.passed
    with pytest.raises(NumericalFailure) as info:
        runner.ensure_passed(record)
    assert info.value.invariant == 'trace'
    assert info.value.exit_code == 3


def test_spdm_record_uses_configured_trace_tolerance():
    doc = {'schema': 1, 'kind': 'spdm', 'tolerances': {'trace': 1e-7},
           'params': {'window': 5, 'total_time': 0.1, 'initial': 'uniform', 'periodic': True}}
    record = runner.run(parse_config(json.dumps(doc)))
    tolerances = {c['name']: c['tolerance'] for c in record.to_json()['checks']}
    assert tolerances['trace'] == 1e-7
    assert tolerances['hermiticity'] == 1e-12
