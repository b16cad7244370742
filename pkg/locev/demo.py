#!/usr/bin/env python3
"""Built-in demonstrations with known closed-form answers."""

import logging
from typing import Callable, Dict, List, NamedTuple

import click
import numpy as np

from . import rates
from .dynamics import InvariantCheck, apply_localizing_event, purity, superposition
from .lattice import (LocalizationKernel, brillouin_zone, build_basis, jump_operator_momentum,
                      momentum_transfer, number_operator, site_jump_family)
from .util import format_float

logger = logging.getLogger(__name__)


class DemoResult(NamedTuple):
    name: str
    values: Dict[str, object]
    checks: List[InvariantCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _close(name: str, value: float, expected: float, tolerance: float) -> InvariantCheck:
    error = abs(value - expected)
    return InvariantCheck(name, float(error), tolerance, bool(error <= tolerance))


def eq12() -> DemoResult:
    """One site-local event on (|2,3> + |3,2>)/sqrt 2."""
    basis = build_basis(2, 5)
    psi = superposition(basis, [(2, 3), (3, 2)])
    rho = apply_localizing_event(psi, site_jump_family(basis), basis)
    diagonal = [rho.element((2, 3), (2, 3)).real, rho.element((3, 2), (3, 2)).real]
    off = rho.element((2, 3), (3, 2))
    return DemoResult('eq12', {
        'basis': ['2,3', '3,2'],
        'matrix': [[diagonal[0], off.real], [off.real, diagonal[1]]],
        'purity': purity(rho),
    }, [
        _close('diagonal', diagonal[0], 0.5, 1e-12),
        _close('off_diagonal', off.real, 6 / 13, 1e-12),
    ])


def fbar() -> DemoResult:
    three = rates.fbar_squared(LocalizationKernel.three_point())
    delta = rates.fbar_squared(LocalizationKernel.delta())
    closed = 0.5 + 2 * (1 / np.sqrt(2) - 0.5) ** 2
    return DemoResult('fbar', {'three_point': three, 'delta': delta}, [
        _close('three_point', three, closed, 1e-12),
        _close('delta', delta, 2.0, 0.0),
    ])


def eq28_identity(sites: int = 4, particles: int = 3) -> DemoResult:
    """sum_k c_{k+p}^dag c_k = L~_p and (1/M) sum_p L~_p^dag L~_p = sum_i n_i^2."""
    basis = build_basis(sites, particles)
    transfer = 0.0
    total = None
    for p in brillouin_zone(sites):
        jump = jump_operator_momentum(basis, p)
        transfer = max(transfer, (momentum_transfer(basis, p) - jump).norm())
        term = jump.dagger() @ jump
        total = term if total is None else total + term
    squares = None
    for site in range(sites):
        n = number_operator(basis, site)
        squares = n @ n if squares is None else squares + n @ n
    sum_rule = (total * (1.0 / sites) - squares).norm()
    return DemoResult('eq28-identity', {'M': sites, 'N': particles, 'dim': basis.dim,
                                        'transfer_error': transfer, 'sum_rule_error': sum_rule}, [
        InvariantCheck('transfer', transfer, 1e-12, transfer < 1e-12),
        InvariantCheck('sum_rule', sum_rule, 1e-12, sum_rule < 1e-12),
    ])


def flat_noise_gamma(sites: int = 8, tau_c: float = 0.5, variance: float = 1.3) -> DemoResult:
    noise = rates.NoiseModel.flat(sites, tau_c, variance)
    spectral = rates.gamma_from_spectrum(noise)
    realspace = rates.gamma_from_realspace(noise.converted())
    expected = 2 * tau_c * variance
    return DemoResult('flat-noise-gamma', {'gamma': spectral, 'gamma_realspace': realspace,
                                           'gamma_prime': spectral / 2, 'expected': expected}, [
        _close('spectrum', spectral, expected, 1e-12),
        _close('realspace', realspace, expected, 1e-12),
    ])


DEMOS: Dict[str, Callable[[], DemoResult]] = {
    'eq12': eq12,
    'fbar': fbar,
    'eq28-identity': eq28_identity,
    'flat-noise-gamma': flat_noise_gamma,
}


def _render(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, list):
        return '[' + ', '.join(_render(v) for v in value) + ']'
    return str(value)


@click.command(help='Run built-in demonstrations (all when no name is given)')
@click.argument('names', nargs=-1, type=click.Choice(sorted(DEMOS)))
def demo(names: List[str]):
    failed = 0
    for name in names or list(DEMOS):
        result = DEMOS[name]()
        click.echo(f'[{result.name}]')
        for key, value in result.values.items():
            click.echo(f'  {key} = {_render(value)}')
        for check in result.checks:
            status = click.style('ok', fg='green') if check.passed else click.style('FAIL', fg='red')
            click.echo(f'  check {check.name}: {status} (error={check.value:.3e})')
        failed += 0 if result.passed else 1
    if failed:
        raise click.exceptions.Exit(3)
