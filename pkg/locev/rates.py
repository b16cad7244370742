#!/usr/bin/env python3
"""Closed-form damping rates of the center-of-mass velocity.

Conventions: hbar = a = 1. gamma is the decay constant of <v_CM>, so d<v_CM>/dt = -gamma <v_CM>;
the condensate damping gamma' = gamma / 2 is quoted for comparison with measured rates.
Noise spectra S_k = <|V~_k|^2> and equal-time correlations c(d) = <V_i V_{i+d}> are related by
c = ifft(S), S = fft(c).
"""

import csv
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import click
import numpy as np

from .errors import InvalidArgument
from .lattice import FockBasis, LocalizationKernel, SparseOperator, weighted_number_operator

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
DEFAULT_PARTICLES = 80
DEFAULT_SITES = 60


def _ring_differences(weights: np.ndarray) -> float:
    return float(np.sum(np.abs(weights - np.roll(weights, -1)) ** 2))


def fbar_squared(kernel: LocalizationKernel, sites: Optional[int] = None) -> float:
    """sum_l |f(-l) - f(1-l)|^2 on the infinite chain, or on a ring of the given size."""
    kernel.ensure_normalized()
    if sites is not None:
        return _ring_differences(kernel.site_weights(0, sites, periodic=True))
    lo, hi = min(kernel.offsets) - 1, max(kernel.offsets)
    return float(sum(abs(kernel.amplitude(d) - kernel.amplitude(d + 1)) ** 2 for d in range(lo, hi + 1)))


def cm_damping_rate(rate: float, kernel: Optional[LocalizationKernel] = None) -> float:
    """2 r for site-local events, fbar^2 r for a kernel."""
    if rate < 0:
        raise InvalidArgument(f'NegativeRate(r={rate})')
    if kernel is None:
        return 2.0 * rate
    return fbar_squared(kernel) * rate


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Fluctuating on-site potential with correlation time tau_c, in either representation."""
    sites: int
    tau_c: float
    spectrum: Optional[np.ndarray] = None
    correlation: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.tau_c < 0:
            raise InvalidArgument(f'NegativeCorrelationTime(tau_c={self.tau_c})')
        if (self.spectrum is None) == (self.correlation is None):
            raise InvalidArgument('NoiseRepresentation(exactly one of spectrum, correlation)')
        values = self.spectrum if self.spectrum is not None else self.correlation
        if values.shape != (self.sites,):
            raise InvalidArgument(f'LengthMismatch(len={values.size},M={self.sites})')
        mirrored = np.roll(values[::-1], 1)
        scale = max(float(np.max(np.abs(values))), 1.0)
        if np.max(np.abs(values - mirrored)) > SYMMETRY_TOLERANCE * scale:
            raise InvalidArgument('AsymmetricNoise(S_k != S_{M-k})')
        spectrum = self.spectrum if self.spectrum is not None else spectrum_from_realspace(self.correlation)
        if np.any(spectrum < -SYMMETRY_TOLERANCE * scale):
            raise InvalidArgument(f'NegativeSpectrum(min={spectrum.min()!r})')

    @classmethod
    def from_spectrum(cls, tau_c: float, spectrum: Sequence[float]) -> 'NoiseModel':
        values = np.asarray(spectrum, dtype=float)
        return cls(values.size, tau_c, spectrum=values)

    @classmethod
    def from_correlation(cls, tau_c: float, correlation: Sequence[float]) -> 'NoiseModel':
        values = np.asarray(correlation, dtype=float)
        return cls(values.size, tau_c, correlation=values)

    @classmethod
    def flat(cls, sites: int, tau_c: float, variance: float) -> 'NoiseModel':
        return cls.from_spectrum(tau_c, np.full(sites, float(variance)))

    def as_spectrum(self) -> np.ndarray:
        if self.spectrum is not None:
            return self.spectrum
        return spectrum_from_realspace(self.correlation)

    def as_correlation(self) -> np.ndarray:
        if self.correlation is not None:
            return self.correlation
        return realspace_from_spectrum(self.spectrum)

    def scaled(self, factor: float) -> 'NoiseModel':
        if self.spectrum is not None:
            return NoiseModel(self.sites, self.tau_c, spectrum=self.spectrum * factor)
        return NoiseModel(self.sites, self.tau_c, correlation=self.correlation * factor)

    def converted(self) -> 'NoiseModel':
        if self.spectrum is not None:
            return NoiseModel(self.sites, self.tau_c, correlation=self.as_correlation())
        return NoiseModel(self.sites, self.tau_c, spectrum=self.as_spectrum())


def realspace_from_spectrum(spectrum: Sequence[float]) -> np.ndarray:
    return np.real(np.fft.ifft(np.asarray(spectrum, dtype=float)))


def spectrum_from_realspace(correlation: Sequence[float]) -> np.ndarray:
    return np.real(np.fft.fft(np.asarray(correlation, dtype=float)))


def gamma_from_spectrum(noise: NoiseModel) -> float:
    """(4 tau_c / M) sum_k S_k sin^2(pi k / M)."""
    m = noise.sites
    k = np.arange(m)
    return float(4 * noise.tau_c / m * np.sum(noise.as_spectrum() * np.sin(np.pi * k / m) ** 2))


def gamma_from_realspace(noise: NoiseModel) -> float:
    """(tau_c / M) sum_i <(V_i - V_{i+1})^2> = tau_c (2 c(0) - c(1) - c(M-1))."""
    c = noise.as_correlation()
    if noise.sites == 1:
        return 0.0
    return float(noise.tau_c * (2 * c[0] - c[1] - c[-1]))


def lindblad_from_noise(noise: NoiseModel, basis: Optional[FockBasis] = None) -> Tuple[float, np.ndarray]:
    """Rate r = tau_c / M and ring kernel g_l = sqrt(M) ifft(sqrt(S))[l].

    With L_l = sum_j g_{j-l} n_j, r sum_l g*_{j'-l} g_{j-l} = tau_c c(j - j').
    """
    if basis is not None and basis.sites != noise.sites:
        raise InvalidArgument(f'DimensionMismatch(basis.M={basis.sites},noise.M={noise.sites})')
    spectrum = np.clip(noise.as_spectrum(), 0.0, None)
    kernel = math.sqrt(noise.sites) * np.fft.ifft(np.sqrt(spectrum))
    rate = noise.tau_c / noise.sites
    logger.debug(f'NoiseKernel(M={noise.sites},r={rate!r},norm2={float(np.sum(np.abs(kernel) ** 2))!r})')
    return rate, kernel


def noise_dissipator(noise: NoiseModel, basis: FockBasis) -> List[Tuple[float, SparseOperator]]:
    rate, kernel = lindblad_from_noise(noise, basis)
    out = []
    for center in range(basis.sites):
        weights = np.roll(kernel, center)
        out.append((rate, weighted_number_operator(basis, weights)))
    return out


def noise_kernel_damping(noise: NoiseModel) -> float:
    """r sum_l |g_{-l} - g_{1-l}|^2 for the noise kernel; equals gamma_from_spectrum."""
    rate, kernel = lindblad_from_noise(noise)
    return rate * _ring_differences(kernel)


@dataclass(frozen=True)
class NHighFit:
    c0: float = 0.01
    c1: float = 0.018
    c2: float = 0.0019

    def __call__(self, depth: float) -> float:
        return n_high_fit(depth, self)


def n_high_fit(depth: float, fit: NHighFit = NHighFit()) -> float:
    """Fraction of atoms above the instability threshold, clamped to [0, 1]."""
    if depth < 0:
        raise InvalidArgument(f'NegativeDepth(V={depth})')
    value = fit.c0 + fit.c1 * depth + fit.c2 * depth ** 2
    return min(1.0, max(0.0, value))


@dataclass(frozen=True)
class BECEstimateInput:
    interaction: float
    hopping: float
    n_high: float
    particles: int = DEFAULT_PARTICLES
    sites: int = DEFAULT_SITES

    def __post_init__(self):
        if self.hopping <= 0:
            raise InvalidArgument(f'NonPositiveHopping(J={self.hopping})')
        if not 0.0 <= self.n_high <= 1.0:
            raise InvalidArgument(f'InvalidFraction(n_high={self.n_high})')
        if self.sites <= 0 or self.particles < 0:
            raise InvalidArgument(f'InvalidLattice(N={self.particles},M={self.sites})')


def gamma_prime_estimate(inp: BECEstimateInput) -> float:
    """2 U^2 (N n_high / M)^2 / J, taking tau_c = 1 / J."""
    density = inp.particles * inp.n_high / inp.sites
    return 2.0 * inp.interaction ** 2 * density ** 2 / inp.hopping


def gamma_prime_general(density_noise: NoiseModel, interaction: float, representation: str = 'spectrum') -> float:
    """gamma' = gamma / 2 for the potential U dn produced by density fluctuations dn."""
    scaled = density_noise.scaled(interaction ** 2)
    if representation == 'spectrum':
        return gamma_from_spectrum(scaled) / 2
    if representation == 'realspace':
        return gamma_from_realspace(scaled) / 2
    raise InvalidArgument(f'UnknownRepresentation(name={representation})')


def band_spectrum(sites: int, particles: float, n_high: float) -> np.ndarray:
    """Flat density-fluctuation spectrum on M/4 <= k <= 3M/4 with (1/M) sum S = (N n_high / M)^2."""
    k = np.arange(sites)
    band = (4 * k >= sites) & (4 * k <= 3 * sites)
    if not np.any(band):
        raise InvalidArgument(f'EmptyBand(M={sites})')
    total = sites * (particles * n_high / sites) ** 2
    return np.where(band, total / np.count_nonzero(band), 0.0)


class LightScattering(NamedTuple):
    rate: float
    depth: float


def light_scattering_scaling(rabi: float, detuning: float, linewidth: float,
                             prefactor: float = 1.0) -> LightScattering:
    """Scattering rate prefactor (Omega/Delta)^2 Gamma and depth prefactor Omega^2/Delta."""
    if detuning == 0:
        raise InvalidArgument('ZeroDetuning()')
    return LightScattering(prefactor * (rabi / detuning) ** 2 * linewidth, prefactor * rabi ** 2 / detuning)


@dataclass(frozen=True)
class LatticeMapping:
    """Deep-lattice approximation J/E_R = c_J V^(3/4) exp(-2 sqrt V), U/E_R = c_U V^(3/4)."""
    hopping_coefficient: float = 4.0 / math.sqrt(math.pi)
    interaction_coefficient: float = 0.05

    def hopping(self, depth: float) -> float:
        self._check(depth)
        return self.hopping_coefficient * depth ** 0.75 * math.exp(-2.0 * math.sqrt(depth))

    def interaction(self, depth: float) -> float:
        self._check(depth)
        return self.interaction_coefficient * depth ** 0.75

    @staticmethod
    def _check(depth: float):
        if depth <= 0:
            raise InvalidArgument(f'NonPositiveDepth(V={depth})')


def lattice_mapping(depth: float, mapping: LatticeMapping = LatticeMapping()) -> Tuple[float, float]:
    return mapping.interaction(depth), mapping.hopping(depth)


class SweepRow(NamedTuple):
    depth: float
    n_high: float
    gamma_prime: float


def gamma_prime_sweep(depths: Sequence[float], mapping: LatticeMapping = LatticeMapping(),
                      fit: NHighFit = NHighFit(), particles: int = DEFAULT_PARTICLES,
                      sites: int = DEFAULT_SITES) -> List[SweepRow]:
    rows = []
    for depth in depths:
        interaction, hopping = lattice_mapping(depth, mapping)
        n_high = n_high_fit(depth, fit)
        value = gamma_prime_estimate(BECEstimateInput(interaction, hopping, n_high, particles, sites))
        rows.append(SweepRow(float(depth), n_high, value))
    if len(rows) > 1:
        logger.info(f'GammaPrimeSweep(points={len(rows)},growth={rows[-1].gamma_prime / rows[0].gamma_prime:.3g})')
    return rows


def read_noise_csv(path: str, tau_c: float) -> NoiseModel:
    """Columns (k, weight) give a spectrum, (offset, correlation) give real-space correlations."""
    with click.open_file(path, 'r') as fd:
        reader = csv.DictReader(fd)
        fields = set(reader.fieldnames or [])
        if {'k', 'weight'} <= fields:
            index, value = 'k', 'weight'
        elif {'offset', 'correlation'} <= fields:
            index, value = 'offset', 'correlation'
        else:
            raise InvalidArgument(f'MissingColumns(path={path},expected=k,weight|offset,correlation)')
        rows = sorted((int(row[index]), float(row[value])) for row in reader)
    if [i for i, _ in rows] != list(range(len(rows))):
        raise InvalidArgument(f'IncompleteNoiseTable(path={path})')
    values = [v for _, v in rows]
    if index == 'k':
        return NoiseModel.from_spectrum(tau_c, values)
    return NoiseModel.from_correlation(tau_c, values)
