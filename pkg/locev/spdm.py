#!/usr/bin/env python3
"""Single-particle density matrix G[i, j] = <a_i^dag a_j> of non-interacting trapped bosons.

With h the single-particle Hamiltonian (on-site V, hopping -J) and site-local
localizing events at rate r, the Heisenberg equations close on G:

    dG/dt = i (h G - G h) - 2 r (G - diag G)

The ground state is stationary for r = 0; for r > 0 coherences decay and the density
flattens toward the homogeneous, fully-depleted state.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .dynamics.master import rk4_step
from .dynamics.state import InvariantCheck
from .errors import InvalidArgument, NumericalFailure

logger = logging.getLogger(__name__)

GAUSSIAN_FIT_FRACTION = 0.5
BOUNDARY_RATIO = 1e-8


@dataclass(frozen=True)
class TrapSpec:
    window: int
    hopping: float
    potential: Tuple[float, ...]
    rate: float = 0.0
    periodic: bool = False

    def __post_init__(self):
        if self.window % 2 == 0:
            raise InvalidArgument(f'EvenWindow(M_w={self.window})')
        if len(self.potential) != self.window:
            raise InvalidArgument(f'PotentialLengthMismatch(len={len(self.potential)},M_w={self.window})')
        if self.rate < 0:
            raise InvalidArgument(f'NegativeRate(r={self.rate})')

    @classmethod
    def parabolic(cls, window: int, hopping: float, curvature: float, rate: float = 0.0,
                  periodic: bool = False) -> 'TrapSpec':
        if curvature < 0:
            raise InvalidArgument(f'NegativeCurvature(omega={curvature})')
        positions = site_positions(window)
        return cls(window, hopping, tuple(float(curvature * x * x) for x in positions), rate, periodic)

    def with_rate(self, rate: float) -> 'TrapSpec':
        return TrapSpec(self.window, self.hopping, self.potential, rate, self.periodic)

    def hamiltonian(self) -> np.ndarray:
        m = self.window
        h = np.diag(np.asarray(self.potential, dtype=float))
        for j in range(m - 1):
            h[j, j + 1] = h[j + 1, j] = -self.hopping
        if self.periodic and m > 2:
            h[0, m - 1] = h[m - 1, 0] = -self.hopping
        return h


@dataclass(frozen=True, eq=False)
class SPDMatrix:
    matrix: np.ndarray
    particles: float

    @property
    def window(self) -> int:
        return self.matrix.shape[0]

    def checks(self, trace_tolerance: float = 1e-9, hermiticity_tolerance: float = 1e-12,
               diagonal_tolerance: float = -1e-10) -> List[InvariantCheck]:
        drift = abs(np.trace(self.matrix) - self.particles)
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        lowest = float(np.min(np.real(np.diag(self.matrix))))
        return [
            InvariantCheck('trace', float(drift), trace_tolerance, bool(drift <= trace_tolerance)),
            InvariantCheck('hermiticity', herm, hermiticity_tolerance, herm <= hermiticity_tolerance),
            InvariantCheck('diagonal', lowest, diagonal_tolerance, lowest >= diagonal_tolerance),
        ]


def site_positions(window: int) -> np.ndarray:
    return np.arange(window) - (window - 1) / 2


def _check(state: SPDMatrix, trap: TrapSpec):
    if state.window != trap.window:
        raise InvalidArgument(f'DimensionMismatch(state={state.window},trap={trap.window})')


def spdm_rhs(state: SPDMatrix, trap: TrapSpec) -> np.ndarray:
    _check(state, trap)
    return _generator(trap)(state.matrix)


def _generator(trap: TrapSpec):
    h = trap.hamiltonian()
    rate = trap.rate

    def rhs(g: np.ndarray) -> np.ndarray:
        out = 1j * (h @ g - g @ h)
        if rate:
            out -= 2 * rate * (g - np.diag(np.diag(g)))
        return out
    return rhs


def ground_state_spdm(trap: TrapSpec, particles: float,
                      max_boundary_ratio: Optional[float] = BOUNDARY_RATIO) -> SPDMatrix:
    """N C_i^* C_j for the lowest eigenvector C of the single-particle Hamiltonian."""
    _, vectors = np.linalg.eigh(trap.hamiltonian())
    c = vectors[:, 0]
    g = particles * np.outer(c.conj(), c)
    if max_boundary_ratio is not None and not trap.periodic:
        density = np.abs(c) ** 2
        ratio = float(max(density[0], density[-1]) / density.max())
        if ratio >= max_boundary_ratio:
            raise InvalidArgument(f'WindowTooSmall(M_w={trap.window},boundary_ratio={ratio:.3e})')
    return SPDMatrix(g.astype(complex), float(particles))


def uniform_spdm(window: int, particles: float) -> SPDMatrix:
    return SPDMatrix(np.eye(window, dtype=complex) * particles / window, float(particles))


def plane_wave_spdm(window: int, particles: float, q: int) -> SPDMatrix:
    """All particles in the ring mode exp(2 pi i q j / M) / sqrt(M)."""
    c = np.exp(2j * np.pi * q * np.arange(window) / window) / math.sqrt(window)
    return SPDMatrix(particles * np.outer(c.conj(), c), float(particles))


def evolve_spdm(state0: SPDMatrix, trap: TrapSpec, total_time: float, dt: float,
                record_every: int = 1, trace_tolerance: float = 1e-9) -> List[Tuple[float, SPDMatrix]]:
    _check(state0, trap)
    for check in state0.checks(trace_tolerance):
        if not check.passed:
            raise NumericalFailure(check.name, 0, check.value)
    if dt <= 0 or total_time < 0 or record_every < 1:
        raise InvalidArgument(f'InvalidTimeGrid(dt={dt},T={total_time},record_every={record_every})')

    rhs = _generator(trap)
    steps = int(round(total_time / dt))
    g = state0.matrix.astype(complex)
    series = [(0.0, state0)]
    worst = 0.0
    for step in range(1, steps + 1):
        g = rk4_step(rhs, g, dt)
        skew = g - g.conj().T
        worst = max(worst, float(np.max(np.abs(skew))))
        g = g - 0.5 * skew
        if step % record_every == 0 or step == steps:
            snapshot = SPDMatrix(g.copy(), state0.particles)
            for check in snapshot.checks(trace_tolerance):
                if not check.passed:
                    raise NumericalFailure(check.name, step, check.value)
            series.append((step * dt, snapshot))
    logger.debug(f'HermitianSymmetrization(max_deviation={worst:.3e},steps={steps})')
    logger.info(f'SPDMEvolution(M_w={trap.window},r={trap.rate},steps={steps},snapshots={len(series)})')
    return series


def density_profile(state: SPDMatrix) -> np.ndarray:
    return np.real(np.diag(state.matrix)).copy()


def off_diagonal_weight(state: SPDMatrix) -> float:
    g = state.matrix
    return float(np.sum(np.abs(g) ** 2) - np.sum(np.abs(np.diag(g)) ** 2))


def spdm_energy(state: SPDMatrix, trap: TrapSpec) -> float:
    return float(np.real(np.sum(trap.hamiltonian() * state.matrix)))


def boundary_ratio(profile: Sequence[float]) -> float:
    p = np.asarray(profile, dtype=float)
    return float(max(p[0], p[-1]) / p.max())


class FlatnessReport(NamedTuple):
    variance: float
    kurtosis: float
    matched_variance: float


def flatness_report(profile: Sequence[float], positions: Optional[Sequence[float]] = None,
                    fit_fraction: float = GAUSSIAN_FIT_FRACTION) -> FlatnessReport:
    """Moments of the profile and the variance of the Gaussian with the same central curvature.

    The central Gaussian is a quadratic fit of log-density over the points at or above
    fit_fraction of the peak; a non-negative curvature gives an infinite matched variance.
    """
    p = np.asarray(profile, dtype=float)
    x = site_positions(p.size) if positions is None else np.asarray(positions, dtype=float)
    peak = int(np.argmax(p))
    if peak == 0 or peak == p.size - 1:
        raise InvalidArgument(f'NoInteriorMaximum(argmax={peak},len={p.size})')

    w = p / p.sum()
    mean = float(np.sum(w * x))
    variance = float(np.sum(w * (x - mean) ** 2))
    kurtosis = float(np.sum(w * (x - mean) ** 4) / variance ** 2)

    central = p >= fit_fraction * p[peak]
    if np.count_nonzero(central) < 3:
        raise InvalidArgument(f'TooFewCentralPoints(count={np.count_nonzero(central)})')
    curvature = np.polyfit(x[central], np.log(p[central]), 2)[0]
    matched = math.inf if curvature >= 0 else float(-1.0 / (2.0 * curvature))
    return FlatnessReport(variance, kurtosis, matched)


class FlatteningRun(NamedTuple):
    trap: TrapSpec
    series: List[Tuple[float, SPDMatrix]]
    reports: List[FlatnessReport]
    boundary: List[float]


def flattening_experiment(window: int = 41, curvature_ratio: float = 0.1, rate: float = 0.5,
                          total_time: float = 4.0, dt: float = 0.01, snapshots: int = 10,
                          hopping: float = 1.0, particles: float = 1.0) -> FlatteningRun:
    """Ground state of a parabolic trap, then localizing events switched on at rate r."""
    trap = TrapSpec.parabolic(window, hopping, curvature_ratio * hopping, rate)
    state0 = ground_state_spdm(trap.with_rate(0.0), particles)
    steps = int(round(total_time / dt))
    series = evolve_spdm(state0, trap, total_time, dt, record_every=max(1, steps // snapshots))
    profiles = [density_profile(state) for _, state in series]
    boundary = [boundary_ratio(p) for p in profiles]
    if max(boundary) >= 1e-6:
        logger.warning(f'WindowBoundaryDensity(max_ratio={max(boundary):.3e},M_w={window})')
    return FlatteningRun(trap, series, [flatness_report(p) for p in profiles], boundary)


def flattening_snapshot_times(rate: float = 0.5, hopping: float = 1.0) -> Tuple[float, float]:
    """The two quoted snapshot times of the flattening run: 4/J and 8/r."""
    if rate <= 0:
        raise InvalidArgument(f'NonPositiveRate(r={rate})')
    return 4.0 / hopping, 8.0 / rate


def flattening_comparison(window: int = 41, curvature_ratio: float = 0.1, rate: float = 0.5,
                          dt: float = 0.01, snapshots: int = 10,
                          hopping: float = 1.0) -> Tuple[FlatteningRun, FlatteningRun]:
    short, long = flattening_snapshot_times(rate, hopping)
    runs = tuple(flattening_experiment(window, curvature_ratio, rate, t, dt, snapshots, hopping)
                 for t in (short, long))
    logger.info(f'FlatteningComparison(t={short},{long},kurtosis={runs[0].reports[-1].kurtosis:.4f},'
                f'{runs[1].reports[-1].kurtosis:.4f})')
    return runs
