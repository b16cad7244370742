#!/usr/bin/env python3

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgument, NumericalFailure
from ..lattice import FockBasis, SparseOperator, ensure_quasimomentum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    trace: float = 1e-9
    hermiticity: float = 1e-12
    positivity: float = -1e-8

    @classmethod
    def from_mapping(cls, values: Optional[dict]) -> 'Tolerances':
        values = values or {}
        return cls(**{k: float(v) for k, v in values.items() if k in cls.__dataclass_fields__})


class InvariantCheck(NamedTuple):
    name: str
    value: float
    tolerance: float
    passed: bool


class TimeSeriesRecord(NamedTuple):
    time: float
    observable: str
    re: float
    im: float
    stderr: float


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    basis: Optional[FockBasis] = None

    @classmethod
    def from_pure(cls, psi: np.ndarray, basis: Optional[FockBasis] = None) -> 'DensityMatrix':
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), basis)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        hermitian = (self.matrix + self.matrix.conj().T) / 2
        return float(np.linalg.eigvalsh(hermitian)[0])

    def checks(self, tolerances: Tolerances = Tolerances()) -> List[InvariantCheck]:
        drift = abs(self.trace() - 1.0)
        herm = self.hermiticity_error()
        lowest = self.min_eigenvalue()
        return [
            InvariantCheck('trace', drift, tolerances.trace, drift <= tolerances.trace),
            InvariantCheck('hermiticity', herm, tolerances.hermiticity, herm <= tolerances.hermiticity),
            InvariantCheck('positivity', lowest, tolerances.positivity, lowest >= tolerances.positivity),
        ]

    def ensure_valid(self, tolerances: Tolerances = Tolerances(), step: int = 0) -> 'DensityMatrix':
        for check in self.checks(tolerances):
            if not check.passed:
                raise NumericalFailure(check.name, step, check.value)
        return self

    def element(self, row: Sequence[int], col: Sequence[int]) -> complex:
        if self.basis is None:
            raise InvalidArgument('DensityMatrixWithoutBasis()')
        return complex(self.matrix[self.basis.index_of(row), self.basis.index_of(col)])


@dataclass(frozen=True)
class EvolutionSpec:
    """H plus (rate, jump operator) pairs of the factor-2 Lindblad form."""
    hamiltonian: SparseOperator
    dissipators: Tuple[Tuple[float, SparseOperator], ...] = ()
    dt: float = 0.01
    total_time: float = 1.0
    record_every: int = 1

    def __post_init__(self):
        if any(rate < 0 for rate, _ in self.dissipators):
            raise InvalidArgument('NegativeRate()')
        if self.dt <= 0 or self.total_time < 0:
            raise InvalidArgument(f'InvalidTimeGrid(dt={self.dt},T={self.total_time})')
        if self.record_every < 1:
            raise InvalidArgument(f'InvalidRecordInterval(record_every={self.record_every})')

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    @property
    def steps(self) -> int:
        return int(round(self.total_time / self.dt))


@dataclass(frozen=True)
class TrajectoryConfig:
    count: int = 1000
    seed: int = 0
    dt: float = 0.01
    threads: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise InvalidArgument(f'InvalidTrajectoryCount(count={self.count})')
        if self.dt <= 0:
            raise InvalidArgument(f'InvalidTimeStep(dt={self.dt})')


def default_time_step(hopping: float, rate: float, particles: int) -> float:
    candidates = [0.01 / abs(hopping)] if hopping else []
    if rate > 0 and particles > 0:
        candidates.append(0.01 / (rate * particles ** 2))
    return min(candidates) if candidates else 0.01


def expectation(op: SparseOperator, rho: DensityMatrix) -> complex:
    if op.shape != rho.matrix.shape:
        raise InvalidArgument(f'DimensionMismatch(op={op.shape},rho={rho.matrix.shape})')
    return complex(np.trace(op.matrix @ rho.matrix))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def prepare_bloch_condensate(basis: FockBasis, q: int) -> np.ndarray:
    """All N bosons in b_q^dagger = (1/sqrt M) sum_j exp(2 pi i q j / M) a_j^dagger."""
    if basis.particles < 1:
        raise InvalidArgument('EmptyLattice(N=0)')
    ensure_quasimomentum(q, basis.sites)
    sites, particles = basis.sites, basis.particles
    occupations = basis.occupations()
    log_weight = np.array([math.lgamma(particles + 1) - sum(math.lgamma(n + 1) for n in state)
                           for state in basis.states])
    phases = np.exp(2j * np.pi * q * (occupations @ np.arange(sites)) / sites)
    psi = np.exp(0.5 * log_weight - 0.5 * particles * math.log(sites)) * phases
    return psi / np.linalg.norm(psi)


def fock_state(basis: FockBasis, occupation: Sequence[int]) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=complex)
    psi[basis.index_of(occupation)] = 1.0
    return psi


def superposition(basis: FockBasis, occupations: Sequence[Sequence[int]],
                  amplitudes: Optional[Sequence[complex]] = None) -> np.ndarray:
    amplitudes = amplitudes if amplitudes is not None else [1.0] * len(occupations)
    psi = np.zeros(basis.dim, dtype=complex)
    for occupation, amp in zip(occupations, amplitudes):
        psi[basis.index_of(occupation)] += amp
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidArgument('ZeroState()')
    return psi / norm


def coherence_operator(basis: FockBasis, row: Sequence[int], col: Sequence[int]) -> SparseOperator:
    """|col><row|, whose expectation is the density-matrix element rho[row, col]."""
    return SparseOperator.from_entries((basis.dim, basis.dim), [(basis.index_of(col), basis.index_of(row), 1.0)])
