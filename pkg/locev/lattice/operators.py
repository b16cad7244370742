#!/usr/bin/env python3

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgument
from .basis import FockBasis, build_basis
from .model import (KickSpectrum, LatticeSpec, LocalizationKernel, brillouin_zone,
                    ensure_quasimomentum)

logger = logging.getLogger(__name__)

Entry = Tuple[int, int, complex]


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex matrix in a Fock basis, possibly rectangular between particle sectors."""
    matrix: sp.csr_matrix

    @classmethod
    def from_entries(cls, shape: Tuple[int, int], entries: Iterable[Entry]) -> 'SparseOperator':
        rows, cols, vals = [], [], []
        for r, c, v in entries:
            rows.append(r)
            cols.append(c)
            vals.append(v)
        coo = sp.coo_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=shape)
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.eliminate_zeros()
        return cls(csr)

    @classmethod
    def diagonal_of(cls, values: Sequence[complex]) -> 'SparseOperator':
        matrix = sp.diags(np.asarray(values, dtype=complex), format='csr')
        matrix.eliminate_zeros()
        return cls(matrix)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @property
    def dim(self) -> int:
        rows, cols = self.shape
        if rows != cols:
            raise InvalidArgument(f'RectangularOperator(shape={self.shape})')
        return rows

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    @property
    def is_diagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def dagger(self) -> 'SparseOperator':
        return SparseOperator(self.matrix.conj().T.tocsr())

    def __add__(self, other: 'SparseOperator') -> 'SparseOperator':
        return SparseOperator((self.matrix + other.matrix).tocsr())

    def __sub__(self, other: 'SparseOperator') -> 'SparseOperator':
        return SparseOperator((self.matrix - other.matrix).tocsr())

    def __matmul__(self, other: 'SparseOperator') -> 'SparseOperator':
        return SparseOperator((self.matrix @ other.matrix).tocsr())

    def __mul__(self, scalar: complex) -> 'SparseOperator':
        return SparseOperator((self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def norm(self) -> float:
        """Largest entry magnitude; zero for the zero operator."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix.data)))

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


def weighted_number_operator(basis: FockBasis, weights: Sequence[complex]) -> SparseOperator:
    """Diagonal operator sum_j w_j n_j."""
    w = np.asarray(weights, dtype=complex)
    if w.shape != (basis.sites,):
        raise InvalidArgument(f'WeightLengthMismatch(len={w.size},M={basis.sites})')
    return SparseOperator.diagonal_of(basis.occupations() @ w)


def number_operator(basis: FockBasis, site: int) -> SparseOperator:
    basis.check_site(site)
    return SparseOperator.diagonal_of(basis.occupations()[:, site].astype(complex))


def total_number_operator(basis: FockBasis) -> SparseOperator:
    return weighted_number_operator(basis, np.ones(basis.sites))


def _hop_entries(basis: FockBasis, to_site: int, from_site: int) -> Iterable[Entry]:
    """Entries of a_to^dagger a_from."""
    for col, state in enumerate(basis.states):
        n_from = state[from_site]
        if n_from == 0:
            continue
        if to_site == from_site:
            yield col, col, float(n_from)
            continue
        target = list(state)
        target[from_site] -= 1
        target[to_site] += 1
        yield basis.index[tuple(target)], col, math.sqrt(n_from * (state[to_site] + 1))


def hopping_operator(basis: FockBasis, to_site: int, from_site: int) -> SparseOperator:
    basis.check_site(to_site)
    basis.check_site(from_site)
    return SparseOperator.from_entries((basis.dim, basis.dim), _hop_entries(basis, to_site, from_site))


def _check_spec(basis: FockBasis, spec: LatticeSpec):
    if spec.sites != basis.sites:
        raise InvalidArgument(f'DimensionMismatch(spec.M={spec.sites},basis.M={basis.sites})')


def hopping_hamiltonian(basis: FockBasis, spec: LatticeSpec) -> SparseOperator:
    """-J sum_j (a_j^dagger a_{j+1} + h.c.) + sum_j V(j) n_j."""
    _check_spec(basis, spec)
    entries: List[Entry] = []
    for j, k in spec.bonds():
        for r, c, v in _hop_entries(basis, j, k):
            entries.append((r, c, -spec.hopping * v))
        for r, c, v in _hop_entries(basis, k, j):
            entries.append((r, c, -spec.hopping * v))
    potential = basis.occupations() @ np.asarray(spec.potential, dtype=float)
    entries.extend((idx, idx, complex(v)) for idx, v in enumerate(potential) if v != 0)
    return SparseOperator.from_entries((basis.dim, basis.dim), entries)


def cm_position_operator(basis: FockBasis) -> SparseOperator:
    """(a/N) sum_j j n_j with site labels j = 1..M and a = 1."""
    if basis.particles == 0:
        raise InvalidArgument('EmptyLattice(N=0)')
    labels = np.arange(1, basis.sites + 1, dtype=float)
    return weighted_number_operator(basis, labels / basis.particles)


def cm_velocity_operator(basis: FockBasis, spec: LatticeSpec) -> SparseOperator:
    """(iJ/N) sum_j (a_{j+1}^dagger a_j - a_j^dagger a_{j+1}) on a ring."""
    _check_spec(basis, spec)
    if not spec.periodic:
        raise InvalidArgument('HardWallVelocity(periodic=False)')
    if basis.particles == 0:
        raise InvalidArgument('EmptyLattice(N=0)')
    coefficient = 1j * spec.hopping / basis.particles
    entries: List[Entry] = []
    for j, k in spec.bonds():
        entries.extend((r, c, coefficient * v) for r, c, v in _hop_entries(basis, k, j))
        entries.extend((r, c, -coefficient * v) for r, c, v in _hop_entries(basis, j, k))
    return SparseOperator.from_entries((basis.dim, basis.dim), entries)


def jump_operator_kernel(basis: FockBasis, kernel: LocalizationKernel, center: int,
                         periodic: bool = True) -> SparseOperator:
    """L_l = sum_j f(j - l) n_j for a normalized kernel."""
    kernel.ensure_normalized()
    basis.check_site(center)
    return weighted_number_operator(basis, kernel.site_weights(center, basis.sites, periodic))


def kernel_jump_family(basis: FockBasis, kernel: LocalizationKernel, periodic: bool = True) -> List[SparseOperator]:
    return [jump_operator_kernel(basis, kernel, center, periodic) for center in range(basis.sites)]


def site_jump_family(basis: FockBasis) -> List[SparseOperator]:
    return [number_operator(basis, site) for site in range(basis.sites)]


def jump_operator_momentum(basis: FockBasis, p: int) -> SparseOperator:
    """L~_p = sum_j exp(2 pi i p j / M) n_j with 0-based j."""
    ensure_quasimomentum(p, basis.sites)
    phases = np.exp(2j * np.pi * p * np.arange(basis.sites) / basis.sites)
    return weighted_number_operator(basis, phases)


def kick_spectrum_dissipator(basis: FockBasis, spectrum: KickSpectrum, rate: float) -> List[Tuple[float, SparseOperator]]:
    """(rate * g(p), L~_p) pairs of the light-scattering master equation."""
    if spectrum.sites != basis.sites:
        raise InvalidArgument(f'DimensionMismatch(spectrum.M={spectrum.sites},basis.M={basis.sites})')
    return [(rate * g, jump_operator_momentum(basis, p)) for p, g in spectrum.items() if g > 0]


def kernel_from_lattice_spectrum(spectrum: KickSpectrum) -> LocalizationKernel:
    """f(j) = (1/sqrt M) sum_p sqrt(g(p)) exp(-2 pi i p j / M), one amplitude per ring offset."""
    sites = spectrum.sites
    roots = np.sqrt(np.asarray(spectrum.probabilities))
    momenta = np.asarray(spectrum.momenta())
    offsets = np.arange(sites)
    amplitudes = np.exp(-2j * np.pi * np.outer(offsets, momenta) / sites) @ roots / math.sqrt(sites)
    return LocalizationKernel(tuple(int(o) for o in offsets), tuple(complex(a) for a in amplitudes))


def annihilation_operator(basis: FockBasis, site: int, lower: Optional[FockBasis] = None) -> SparseOperator:
    """a_j as a rectangular map from the N-particle sector to the N-1 sector."""
    if basis.particles == 0:
        raise InvalidArgument('EmptySector(N=0)')
    basis.check_site(site)
    lower = lower or build_basis(basis.sites, basis.particles - 1)
    entries: List[Entry] = []
    for col, state in enumerate(basis.states):
        n = state[site]
        if n == 0:
            continue
        target = list(state)
        target[site] -= 1
        entries.append((lower.index[tuple(target)], col, math.sqrt(n)))
    return SparseOperator.from_entries((lower.dim, basis.dim), entries)


def momentum_annihilation(basis: FockBasis, k: int, lower: Optional[FockBasis] = None) -> SparseOperator:
    """c_k = (1/sqrt M) sum_j exp(-2 pi i k j / M) a_j between the N and N-1 sectors."""
    if basis.particles == 0:
        raise InvalidArgument('EmptySector(N=0)')
    lower = lower or build_basis(basis.sites, basis.particles - 1)
    sites = basis.sites
    total = None
    for j in range(sites):
        term = annihilation_operator(basis, j, lower) * (np.exp(-2j * np.pi * k * j / sites) / math.sqrt(sites))
        total = term if total is None else total + term
    return total


def momentum_transfer(basis: FockBasis, p: int) -> SparseOperator:
    """sum_k c_{k+p}^dagger c_k over the Brillouin zone, quasimomenta taken modulo M."""
    lower = build_basis(basis.sites, basis.particles - 1)
    annihilators = {k % basis.sites: momentum_annihilation(basis, k, lower) for k in brillouin_zone(basis.sites)}
    total = None
    for k in brillouin_zone(basis.sites):
        term = annihilators[(k + p) % basis.sites].dagger() @ annihilators[k % basis.sites]
        total = term if total is None else total + term
    return total
