#!/usr/bin/env python3

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgument
from ..lattice import SparseOperator
from .state import (DensityMatrix, EvolutionSpec, TimeSeriesRecord, Tolerances,
                    expectation)

logger = logging.getLogger(__name__)

Snapshot = Tuple[float, DensityMatrix]
Observable = Tuple[str, SparseOperator]


class LindbladGenerator:
    """rho -> -i[H, rho] - sum r (L^dag L rho + rho L^dag L - 2 L rho L^dag).

    Diagonal jump operators are folded into one element-wise factor matrix; the
    others are applied as dense products.
    """

    def __init__(self, spec: EvolutionSpec):
        dim = spec.dim
        self.dim = dim
        self.hamiltonian = spec.hamiltonian.dense()
        self.factor = np.zeros((dim, dim), dtype=complex)
        self.dense_jumps: List[Tuple[float, np.ndarray, np.ndarray]] = []
        for rate, op in spec.dissipators:
            if op.shape != (dim, dim):
                raise InvalidArgument(f'DimensionMismatch(jump={op.shape},H={(dim, dim)})')
            if rate == 0:
                continue
            if op.is_diagonal:
                d = op.diagonal()
                mag = np.abs(d) ** 2
                self.factor += rate * (2 * np.outer(d, d.conj()) - mag[:, None] - mag[None, :])
            else:
                dense = op.dense()
                self.dense_jumps.append((rate, dense, dense.conj().T @ dense))
        logger.debug(f'LindbladGenerator(dim={dim},dense_jumps={len(self.dense_jumps)})')

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h) + self.factor * rho
        for rate, l, ldl in self.dense_jumps:
            out += rate * (2 * l @ rho @ l.conj().T - ldl @ rho - rho @ ldl)
        return out


def lindblad_rhs(spec: EvolutionSpec, rho: DensityMatrix) -> np.ndarray:
    if rho.matrix.shape != (spec.dim, spec.dim):
        raise InvalidArgument(f'DimensionMismatch(rho={rho.matrix.shape},H={(spec.dim, spec.dim)})')
    return LindbladGenerator(spec)(rho.matrix)


def rk4_step(rhs, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve_master(rho0: DensityMatrix, spec: EvolutionSpec,
                  tolerances: Tolerances = Tolerances()) -> List[Snapshot]:
    """Fixed-step RK4 integration; invariants are enforced at every stored snapshot."""
    rho0.ensure_valid(tolerances, step=0)
    if rho0.dim != spec.dim:
        raise InvalidArgument(f'DimensionMismatch(rho={rho0.dim},H={spec.dim})')

    generator = LindbladGenerator(spec)
    steps = spec.steps
    rho = rho0.matrix.astype(complex)
    series: List[Snapshot] = [(0.0, rho0)]
    worst = 0.0
    for step in range(1, steps + 1):
        rho = rk4_step(generator, rho, spec.dt)
        skew = rho - rho.conj().T
        worst = max(worst, float(np.max(np.abs(skew))))
        rho = rho - 0.5 * skew
        if step % spec.record_every == 0 or step == steps:
            snapshot = DensityMatrix(rho.copy(), rho0.basis).ensure_valid(tolerances, step=step)
            series.append((step * spec.dt, snapshot))
    logger.debug(f'HermitianSymmetrization(max_deviation={worst:.3e},steps={steps})')
    logger.info(f'MasterEquation(dim={spec.dim},steps={steps},snapshots={len(series)})')
    return series


def coherence_decay_factor(n: Sequence[int], nprime: Sequence[int], rate: float, t: float) -> float:
    """exp(-r t sum_i (n_i - n'_i)^2): the closed-form decay of a Fock-basis coherence at H = 0."""
    if len(n) != len(nprime):
        raise InvalidArgument(f'LengthMismatch(n={len(n)},nprime={len(nprime)})')
    distance = sum((a - b) ** 2 for a, b in zip(n, nprime))
    return math.exp(-rate * t * distance)


def observe(series: Sequence[Snapshot], observables: Sequence[Observable]) -> List[TimeSeriesRecord]:
    records: List[TimeSeriesRecord] = []
    for t, rho in series:
        for label, op in observables:
            value = expectation(op, rho)
            records.append(TimeSeriesRecord(t, label, value.real, value.imag, 0.0))
    return records


def observable_series(series: Sequence[Snapshot], op: SparseOperator) -> Tuple[np.ndarray, np.ndarray]:
    times = np.array([t for t, _ in series])
    values = np.array([expectation(op, rho) for _, rho in series])
    return times, values
