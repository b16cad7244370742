#!/usr/bin/env python3

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from ..errors import InvalidArgument

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12


def brillouin_zone(sites: int) -> range:
    """Quasimomenta -M/2 <= p < M/2."""
    return range(-(sites // 2), sites - sites // 2)


def ensure_quasimomentum(p: int, sites: int) -> int:
    if p not in brillouin_zone(sites):
        raise InvalidArgument(f'QuasimomentumOutOfZone(p={p},M={sites})')
    return p


@dataclass(frozen=True)
class LatticeSpec:
    sites: int
    hopping: float
    potential: Tuple[float, ...]
    periodic: bool = True

    def __post_init__(self):
        if len(self.potential) != self.sites:
            raise InvalidArgument(f'PotentialLengthMismatch(len={len(self.potential)},M={self.sites})')

    @classmethod
    def uniform(cls, sites: int, hopping: float = 1.0, periodic: bool = True) -> 'LatticeSpec':
        return cls(sites, hopping, (0.0,) * sites, periodic)

    @classmethod
    def parabolic(cls, sites: int, hopping: float, curvature: float, periodic: bool = False) -> 'LatticeSpec':
        center = (sites - 1) / 2
        return cls(sites, hopping, tuple(curvature * (j - center) ** 2 for j in range(sites)), periodic)

    def bonds(self) -> Iterable[Tuple[int, int]]:
        last = self.sites if self.periodic else self.sites - 1
        if self.sites == 1:
            return []
        return [(j, (j + 1) % self.sites) for j in range(last)]


@dataclass(frozen=True)
class LocalizationKernel:
    """Finite-support amplitudes f(i) of a localizing event around its center."""
    offsets: Tuple[int, ...]
    amplitudes: Tuple[complex, ...]

    def __post_init__(self):
        if len(self.offsets) != len(self.amplitudes):
            raise InvalidArgument(f'KernelLengthMismatch(offsets={len(self.offsets)},amplitudes={len(self.amplitudes)})')
        if len(set(self.offsets)) != len(self.offsets):
            raise InvalidArgument(f'DuplicateKernelOffset(offsets={self.offsets})')

    @classmethod
    def delta(cls) -> 'LocalizationKernel':
        return cls((0,), (1.0 + 0j,))

    @classmethod
    def three_point(cls) -> 'LocalizationKernel':
        return cls((-1, 0, 1), (0.5 + 0j, 1 / math.sqrt(2) + 0j, 0.5 + 0j))

    def amplitude(self, offset: int) -> complex:
        for o, a in zip(self.offsets, self.amplitudes):
            if o == offset:
                return a
        return 0j

    @property
    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm_squared - 1.0) <= NORMALIZATION_TOLERANCE

    def ensure_normalized(self) -> 'LocalizationKernel':
        if not self.normalized:
            raise InvalidArgument(f'UnnormalizedKernel(norm2={self.norm_squared!r})')
        return self

    def translated(self, shift: int) -> 'LocalizationKernel':
        return LocalizationKernel(tuple(o + shift for o in self.offsets), self.amplitudes)

    def with_phase(self, phase: float) -> 'LocalizationKernel':
        factor = cmath.exp(1j * phase)
        return LocalizationKernel(self.offsets, tuple(a * factor for a in self.amplitudes))

    def site_weights(self, center: int, sites: int, periodic: bool = True) -> np.ndarray:
        """Weights w[j] = f(j - center); folded modulo M on a ring, dropped past a hard wall."""
        weights = np.zeros(sites, dtype=complex)
        dropped = 0
        for offset, amp in zip(self.offsets, self.amplitudes):
            site = center + offset
            if periodic:
                weights[site % sites] += amp
            elif 0 <= site < sites:
                weights[site] += amp
            else:
                dropped += 1
        if dropped:
            logger.warning(f'KernelTruncated(center={center},dropped={dropped},M={sites})')
        return weights


@dataclass(frozen=True)
class KickSpectrum:
    """Probabilities g(p) for quasimomentum kicks, listed in Brillouin-zone order."""
    probabilities: Tuple[float, ...]

    def __post_init__(self):
        values = np.asarray(self.probabilities, dtype=float)
        if np.any(values < 0):
            raise InvalidArgument('NegativeKickProbability()')
        if abs(values.sum() - 1.0) > 1e-12:
            raise InvalidArgument(f'KickSpectrumNotNormalized(sum={values.sum()!r})')

    @classmethod
    def uniform(cls, sites: int) -> 'KickSpectrum':
        return cls((1.0 / sites,) * sites)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> 'KickSpectrum':
        values = np.asarray(weights, dtype=float)
        return cls(tuple(float(v) for v in values / values.sum()))

    @property
    def sites(self) -> int:
        return len(self.probabilities)

    def momenta(self) -> range:
        return brillouin_zone(self.sites)

    def items(self) -> Iterable[Tuple[int, float]]:
        return zip(self.momenta(), self.probabilities)

    def correlation(self) -> np.ndarray:
        """g~(d) = sum_p g(p) exp(2 pi i p d / M) for d = 0..M-1."""
        d = np.arange(self.sites)
        return np.array([sum(g * np.exp(2j * np.pi * p * dd / self.sites) for p, g in self.items()) for dd in d])
