#!/usr/bin/env python3

from concurrent import futures
import logging
from typing import Any, List, Optional, Tuple

import click

from . import runner
from .config import CONTEXT_SETTINGS, SEED, ExperimentConfig, Settings, load_config, validate_document
from .errors import ConfigError
from .util import parse_values

logger = logging.getLogger(__name__)

SWEEP_THREADS = 4


def sweep_configs(base: ExperimentConfig, param: str, values: List[Any]) -> List[ExperimentConfig]:
    """One config per value of params[param], validated against the same schema as the base."""
    configs = []
    errors = []
    for index, value in enumerate(values):
        params = dict(base.params)
        params[param] = value
        config = base.replace(params=params)
        errors.extend(f'values[{index}]: {e}' for e in validate_document(config.resolved()))
        configs.append(config)
    if errors:
        raise ConfigError(errors)
    return configs


def run_sweep(configs: List[ExperimentConfig], settings: Optional[Settings] = None,
              threads: int = SWEEP_THREADS) -> List[runner.RunRecord]:
    """Independent points in parallel; records come back in parameter order."""
    with futures.ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        items: List[futures.Future] = [executor.submit(runner.run, config, settings, 1) for config in configs]
        return [item.result() for item in items]


def point_path(out: str, index: int) -> str:
    stem, dot, ext = out.rpartition('.')
    if not dot:
        return f'{out}-{index:03d}'
    return f'{stem}-{index:03d}.{ext}'


@click.command(help='Run one experiment config over a list of values of one parameter')
@click.option('--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--param', required=True, help='Key inside "params" to vary')
@click.option('--values', 'values_text', required=True, help='Comma separated values, e.g. 0.1,0.2,0.4')
@click.option('--out', required=True, help='CSV path; point i is written to <stem>-<i>.<ext>')
@click.option('--seed', type=SEED)
@click.option('--threads', '-t', type=click.INT, default=SWEEP_THREADS)
@click.pass_context
def sweep(ctx: click.Context, config_path: str, param: str, values_text: str, out: str,
          seed: Optional[int], threads: int):
    settings = ctx.obj[CONTEXT_SETTINGS] if ctx.obj else Settings()
    try:
        values = parse_values(values_text)
    except ValueError as e:
        raise ConfigError([f'values: {e}'])
    base = load_config(config_path).replace(seed=seed)
    configs = sweep_configs(base, param, values)
    records = run_sweep(configs, settings, threads)
    failures: List[Tuple[int, runner.RunRecord]] = []
    for index, (value, record) in enumerate(zip(values, records)):
        path = point_path(out, index)
        runner.emit_csv(record, path)
        runner.write_record(record, runner.record_path(path))
        status = 'ok' if record.passed else click.style('FAIL', fg='red')
        click.echo(f'[{index:3d}] {param}={value} rows={len(record.rows)} hash={record.config_hash[:12]} {status}')
        if not record.passed:
            failures.append((index, record))
    if failures:
        runner.ensure_passed(failures[0][1])
