#!/usr/bin/env python3

import logging
import sys
from typing import Optional

import click

from . import runner
from .config import CONTEXT_SETTINGS, SEED, Settings, load_config
from .demo import demo
from .errors import ConfigError, LocevError
from .rates import read_noise_csv
from .sweep import sweep
from .util import dump_json

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


class LocevGroup(click.Group):
    """Maps LocevError to its exit code after printing it in red on stderr."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ConfigError as e:
            click.echo(click.style(str(e), fg='red'), err=True)
            for item in e.errors:
                click.echo(f'  {item}', err=True)
            ctx.exit(e.exit_code)
        except LocevError as e:
            click.echo(click.style(str(e), fg='red'), err=True)
            ctx.exit(e.exit_code)


@click.group(cls=LocevGroup)
@click.option('--settings', envvar='LOCEV_SETTINGS', help='Tool-wide settings file')
@click.option('--verbose', '-v', count=True)
@click.pass_context
def main(ctx: click.Context, settings: Optional[str] = None, verbose: int = 0):
    logging.basicConfig(level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)], stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    ctx.obj = {
        CONTEXT_SETTINGS: Settings.locate(settings)
    }


def execute(ctx: click.Context, kind: str, config_path: str, out: Optional[str],
            seed: Optional[int], threads: Optional[int]) -> runner.RunRecord:
    config = load_config(config_path)
    if config.kind != kind:
        raise ConfigError([f'kind: expected {kind!r}, got {config.kind!r}'])
    config = config.replace(seed=seed, output=out)
    record = runner.run(config, ctx.obj[CONTEXT_SETTINGS], threads)
    path = config.output or '-'
    runner.emit_csv(record, path)
    if path != '-':
        runner.write_record(record, runner.record_path(path))
    click.echo(f'{kind}: rows={len(record.rows)} hash={record.config_hash[:12]} '
               f'duration={record.duration:.3f}s', err=True)
    return runner.ensure_passed(record)


def experiment_command(kind: str, description: str) -> click.Command:
    @click.command(help=description)
    @click.option('--config', 'config_path', required=True, type=click.Path(exists=True, dir_okay=False))
    @click.option('--out', help='CSV output path; the run record is written next to it as .json')
    @click.option('--seed', type=SEED)
    @click.option('--threads', '-t', type=click.INT)
    @click.pass_context
    def command(ctx: click.Context, config_path: str, out: Optional[str], seed: Optional[int],
                threads: Optional[int]):
        execute(ctx, kind, config_path, out, seed, threads)
    return command


@click.command(help='Damping-rate sweep over lattice depth, or gamma of a noise table')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--out')
@click.option('--seed', type=SEED)
@click.option('--threads', '-t', type=click.INT)
@click.option('--noise', 'noise_path', type=click.Path(exists=True, dir_okay=False),
              help='CSV with columns k,weight or offset,correlation')
@click.option('--tau-c', type=click.FLOAT, default=1.0)
@click.option('--interaction', '-U', type=click.FLOAT, default=1.0)
@click.pass_context
def rates_command(ctx: click.Context, config_path: Optional[str], out: Optional[str], seed: Optional[int],
                  threads: Optional[int], noise_path: Optional[str], tau_c: float, interaction: float):
    if noise_path is not None:
        dump_json(runner.noise_summary(read_noise_csv(noise_path, tau_c), interaction))
        return
    if config_path is None:
        raise ConfigError(['--config or --noise is required'])
    execute(ctx, 'rates-sweep', config_path, out, seed, threads)


main.add_command(experiment_command('collapse', 'Density operator after collapse onto shifted copies of f'), 'collapse')
main.add_command(experiment_command('kick', 'Density operator after a random momentum kick'), 'kick')
main.add_command(experiment_command('master', 'Exact Lindblad evolution on a Fock basis'), 'master')
main.add_command(experiment_command('trajectories', 'Quantum-trajectory ensemble averages'), 'trajectories')
main.add_command(experiment_command('spdm', 'Single-particle density matrix of trapped bosons'), 'spdm')
main.add_command(rates_command, 'rates')
main.add_command(demo, 'demo')
main.add_command(sweep, 'sweep')

if __name__ == '__main__':
    main()
