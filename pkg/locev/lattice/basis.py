#!/usr/bin/env python3

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..errors import CapacityError, InvalidArgument

logger = logging.getLogger(__name__)

DIMENSION_CAP = 20_000

Occupation = Tuple[int, ...]


def fock_dimension(sites: int, particles: int) -> int:
    return comb(particles + sites - 1, particles)


def _occupations(sites: int, particles: int) -> Iterator[Occupation]:
    # reverse-lexicographic: the first site takes the largest share first
    if sites == 1:
        yield (particles,)
        return
    for first in range(particles, -1, -1):
        for rest in _occupations(sites - 1, particles - first):
            yield (first,) + rest


@dataclass(frozen=True)
class FockBasis:
    """N bosons on M sites, one occupation vector per basis index."""
    sites: int
    particles: int
    states: Tuple[Occupation, ...]
    index: Dict[Occupation, int] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def index_of(self, occupation: Sequence[int]) -> int:
        key = tuple(int(n) for n in occupation)
        if key not in self.index:
            raise InvalidArgument(f'UnknownOccupation(occupation={key},M={self.sites},N={self.particles})')
        return self.index[key]

    def occupations(self) -> np.ndarray:
        """Occupations as a (dim, M) integer array."""
        return np.array(self.states, dtype=np.int64).reshape(self.dim, self.sites)

    def check_site(self, site: int) -> int:
        if not 0 <= site < self.sites:
            raise InvalidArgument(f'SiteOutOfRange(site={site},M={self.sites})')
        return site


def build_basis(sites: int, particles: int, cap: int = DIMENSION_CAP) -> FockBasis:
    if sites < 1 or particles < 0:
        raise InvalidArgument(f'InvalidBasis(M={sites},N={particles})')
    dim = fock_dimension(sites, particles)
    if dim > cap:
        raise CapacityError(sites, particles, dim, cap)

    states: List[Occupation] = list(_occupations(sites, particles))
    index = {state: idx for idx, state in enumerate(states)}
    logger.debug(f'FockBasis(M={sites},N={particles},dim={dim})')
    return FockBasis(sites, particles, tuple(states), index)
