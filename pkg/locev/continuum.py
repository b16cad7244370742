#!/usr/bin/env python3
"""Single particle on a line: collapses onto shifted copies of f and random momentum kicks.

Density operators follow the rho(x, x') = psi^*(x) psi(x') convention. Gaussian wavefunctions
and collapse shapes use psi(x) = (2 pi)^(-1/4) s^(-1/2) exp(-x^2 / 4 s^2), so |psi|^2 has
standard deviation s. Every integral is a trapezoid sum on a uniform grid.
"""

import csv
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import click
import numpy as np

from .dynamics.state import InvariantCheck
from .errors import InvalidArgument

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 1024
DEFAULT_SPAN = 10.0
PADDING_WIDTHS = 5.0
NORM_TOLERANCE = 1e-8
BOUNDARY_TOLERANCE = 1e-8
LEAK_TOLERANCE = 1e-8


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    if x.size < 2:
        raise InvalidArgument(f'GridTooSmall(points={x.size})')
    dx = x[1] - x[0]
    if dx <= 0 or not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise InvalidArgument('NonUniformGrid()')
    w = np.full(x.size, dx)
    w[0] = w[-1] = dx / 2
    return w


def gaussian_amplitude(x: np.ndarray, width: float, center: float = 0.0) -> np.ndarray:
    return (2 * math.pi) ** -0.25 / math.sqrt(width) * np.exp(-(x - center) ** 2 / (4 * width ** 2))


def symmetric_grid(half_width: float, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(-half_width, half_width, points)


@dataclass(frozen=True, eq=False)
class WavefunctionGrid:
    x: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.x.shape != self.amplitudes.shape:
            raise InvalidArgument(f'LengthMismatch(x={self.x.size},psi={self.amplitudes.size})')
        norm = float(np.sum(self.weights * np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidArgument(f'UnnormalizedWavefunction(norm={norm!r})')
        peak = np.max(np.abs(self.amplitudes))
        edge = max(abs(self.amplitudes[0]), abs(self.amplitudes[-1]))
        if edge >= BOUNDARY_TOLERANCE * peak:
            raise InvalidArgument(f'WavefunctionAtBoundary(ratio={edge / peak:.3e})')

    @classmethod
    def gaussian(cls, sigma0: float, points: int = DEFAULT_POINTS,
                 half_width: Optional[float] = None) -> 'WavefunctionGrid':
        if sigma0 <= 0:
            raise InvalidArgument(f'NonPositiveWidth(sigma0={sigma0})')
        x = symmetric_grid(half_width or DEFAULT_SPAN * sigma0, points)
        return cls(x, gaussian_amplitude(x, sigma0).astype(complex))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.x)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class CollapseShape:
    """Either the analytic Gaussian of width l or a gridded profile, zero outside its grid."""
    width: Optional[float] = None
    x: Optional[np.ndarray] = None
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.width is not None:
            if self.width <= 0:
                raise InvalidArgument(f'NonPositiveWidth(l={self.width})')
            return
        if self.x is None or self.amplitudes is None or self.x.shape != self.amplitudes.shape:
            raise InvalidArgument('InvalidCollapseShape()')
        norm = float(np.sum(trapezoid_weights(self.x) * np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidArgument(f'UnnormalizedShape(norm={norm!r})')

    @classmethod
    def gaussian(cls, width: float) -> 'CollapseShape':
        return cls(width=width)

    @classmethod
    def gridded(cls, x: np.ndarray, amplitudes: np.ndarray) -> 'CollapseShape':
        return cls(x=np.asarray(x, dtype=float), amplitudes=np.asarray(amplitudes, dtype=complex))

    @property
    def is_gaussian(self) -> bool:
        return self.width is not None

    @property
    def scale(self) -> float:
        """Characteristic width: l, or the rms width of a gridded |f|^2."""
        if self.is_gaussian:
            return self.width
        w = trapezoid_weights(self.x) * np.abs(self.amplitudes) ** 2
        mean = np.sum(w * self.x)
        return float(math.sqrt(np.sum(w * (self.x - mean) ** 2)))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.is_gaussian:
            return gaussian_amplitude(x, self.width).astype(complex)
        re = np.interp(x, self.x, self.amplitudes.real, left=0.0, right=0.0)
        im = np.interp(x, self.x, self.amplitudes.imag, left=0.0, right=0.0)
        return re + 1j * im


@dataclass(frozen=True, eq=False)
class KickDistribution:
    k: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        if self.k.shape != self.probabilities.shape:
            raise InvalidArgument(f'LengthMismatch(k={self.k.size},p={self.probabilities.size})')
        if np.any(self.probabilities < 0):
            raise InvalidArgument(f'NegativeSpectrum(min={self.probabilities.min()!r})')
        total = float(np.sum(self.weights * self.probabilities))
        if abs(total - 1.0) > NORM_TOLERANCE:
            raise InvalidArgument(f'UnnormalizedKicks(total={total!r})')

    @classmethod
    def gaussian(cls, width: float, center: float = 0.0, points: int = DEFAULT_POINTS) -> 'KickDistribution':
        if width <= 0:
            raise InvalidArgument(f'NonPositiveWidth(dk={width})')
        k = center + symmetric_grid(DEFAULT_SPAN * width, points)
        p = np.exp(-(k - center) ** 2 / (2 * width ** 2)) / (math.sqrt(2 * math.pi) * width)
        return cls(k, p)

    @classmethod
    def uniform(cls, cutoff: float, points: int = DEFAULT_POINTS) -> 'KickDistribution':
        if cutoff <= 0:
            raise InvalidArgument(f'NonPositiveWidth(K={cutoff})')
        k = symmetric_grid(cutoff, points)
        return cls(k, np.full(points, 1.0 / (2 * cutoff)))

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.k)

    @property
    def spread(self) -> float:
        w = self.weights * self.probabilities
        mean = np.sum(w * self.k)
        return float(math.sqrt(np.sum(w * (self.k - mean) ** 2)))

    def characteristic(self, d: np.ndarray) -> np.ndarray:
        """phi(d) = int p(k) exp(-i k d) dk."""
        d = np.asarray(d, dtype=float)
        phases = np.exp(-1j * np.multiply.outer(d, self.k))
        return phases @ (self.weights * self.probabilities)


@dataclass(frozen=True, eq=False)
class ContinuumDensityOperator:
    x: np.ndarray
    matrix: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.x)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def trace(self) -> float:
        return float(np.sum(self.weights * self.diagonal()))

    def purity(self) -> float:
        w = self.weights
        return float(np.real(np.sum(np.outer(w, w) * np.abs(self.matrix) ** 2)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def checks(self, trace_tolerance: float = 1e-6, hermiticity_tolerance: float = 1e-10) -> List[InvariantCheck]:
        drift = abs(self.trace() - 1.0)
        herm = self.hermiticity_error()
        lowest = float(self.diagonal().min())
        return [
            InvariantCheck('trace', drift, trace_tolerance, drift <= trace_tolerance),
            InvariantCheck('hermiticity', herm, hermiticity_tolerance, herm <= hermiticity_tolerance),
            InvariantCheck('diagonal', lowest, 0.0, lowest >= 0.0),
        ]

    def rows(self) -> List[Tuple[float, float, float, float]]:
        out = []
        for i, xi in enumerate(self.x):
            for j, xj in enumerate(self.x):
                value = self.matrix[i, j]
                out.append((float(xi), float(xj), float(value.real), float(value.imag)))
        return out


def _shifted(f: CollapseShape, x: np.ndarray, x0: float, w: np.ndarray) -> np.ndarray:
    values = f.evaluate(x - x0)
    captured = float(np.sum(w * np.abs(values) ** 2))
    if abs(captured - 1.0) > LEAK_TOLERANCE:
        raise InvalidArgument(f'CollapseLeak(x0={x0},captured={captured!r})')
    return values


def collapse_probability(psi: WavefunctionGrid, f: CollapseShape, x0: float) -> float:
    """|int f^*(x - x0) psi(x) dx|^2."""
    w = psi.weights
    shape = _shifted(f, psi.x, x0, w)
    return float(abs(np.sum(w * shape.conj() * psi.amplitudes)) ** 2)


def collapse_density_operator(psi: WavefunctionGrid, f: CollapseShape,
                              padding: float = PADDING_WIDTHS) -> ContinuumDensityOperator:
    """Average of f^*(x - x0) f(x' - x0) over collapse centers x0 weighted by their probability.

    x0 runs over psi's grid extended by padding * l on each side with the same spacing; the
    result is renormalized and the trace before renormalization is logged.
    """
    x, w = psi.x, psi.weights
    dx = psi.dx
    extra = int(math.ceil(padding * f.scale / dx))
    centers = x[0] - extra * dx + dx * np.arange(x.size + 2 * extra)
    center_w = trapezoid_weights(centers)

    shapes = f.evaluate(x[None, :] - centers[:, None])
    amplitudes = shapes.conj() @ (w * psi.amplitudes)
    probs = np.abs(amplitudes) ** 2
    tail = max(probs[0], probs[-1]) / probs.max()
    if tail > LEAK_TOLERANCE:
        raise InvalidArgument(f'CollapseRangeTooSmall(tail={tail:.3e},padding={padding})')

    mix = center_w * probs
    mix = mix / mix.sum()
    rho = shapes.conj().T @ (mix[:, None] * shapes)
    rho = 0.5 * (rho + rho.conj().T)
    raw = float(np.sum(w * np.real(np.diag(rho))))
    if abs(raw - 1.0) > 1e-6:
        logger.warning(f'RenormalizedDensityOperator(trace={raw!r})')
    else:
        logger.debug(f'RenormalizedDensityOperator(trace={raw!r})')
    logger.info(f'CollapseDensityOperator(points={x.size},centers={centers.size})')
    return ContinuumDensityOperator(x.copy(), rho / raw)


@dataclass(frozen=True)
class GaussianCollapse:
    sigma0: float
    width: float

    def __post_init__(self):
        if self.sigma0 <= 0 or self.width <= 0:
            raise InvalidArgument(f'NonPositiveWidth(sigma0={self.sigma0},l={self.width})')

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma0 ** 2 + self.width ** 2)

    def probability(self, x0):
        s2 = self.sigma ** 2
        return 2 * self.sigma0 * self.width / s2 * np.exp(-np.asarray(x0) ** 2 / (2 * s2))

    def density(self, x, xprime):
        x, xprime = np.asarray(x), np.asarray(xprime)
        s2, l2 = self.sigma ** 2, self.width ** 2
        total = s2 + l2
        return (np.exp(-(x ** 2 + xprime ** 2) / (4 * total))
                * np.exp(-(x - xprime) ** 2 * s2 / (8 * l2 * total))
                / math.sqrt(2 * math.pi * total))

    def envelope(self, d):
        s2, l2 = self.sigma ** 2, self.width ** 2
        return np.exp(-np.asarray(d) ** 2 * s2 / (8 * l2 * (s2 + l2)))

    def density_matrix(self, x: np.ndarray) -> ContinuumDensityOperator:
        return ContinuumDensityOperator(x, self.density(x[:, None], x[None, :]).astype(complex))


def gaussian_collapse_closed_form(sigma0: float, width: float) -> GaussianCollapse:
    return GaussianCollapse(sigma0, width)


def kick_density_operator(psi: WavefunctionGrid, p: KickDistribution) -> ContinuumDensityOperator:
    """phi(x - x') psi^*(x) psi(x') with phi the characteristic function of p(k)."""
    nyquist = math.pi / psi.dx
    if np.max(np.abs(p.k)) > nyquist:
        raise InvalidArgument(f'NyquistViolation(k_max={np.max(np.abs(p.k))!r},limit={nyquist!r})')
    n = psi.x.size
    offsets = np.arange(-(n - 1), n)
    phi = p.characteristic(offsets * psi.dx)
    phi = phi / phi[n - 1]
    index = np.arange(n)
    envelope = phi[index[:, None] - index[None, :] + n - 1]
    rho = envelope * np.outer(psi.amplitudes.conj(), psi.amplitudes)
    return ContinuumDensityOperator(psi.x.copy(), rho)


def kernel_from_kick_spectrum(p: KickDistribution, x: Optional[np.ndarray] = None) -> CollapseShape:
    """f(x) = (2 pi)^(-1/2) int exp(-i k x) sqrt(p(k)) dk on a uniform x grid.

    The default grid spans 8 / dk either side of zero with as many points as the k grid.
    """
    if np.any(p.probabilities < 0):
        raise InvalidArgument('NegativeSpectrum()')
    if x is None:
        x = symmetric_grid(8.0 / p.spread, p.k.size)
    x = np.asarray(x, dtype=float)
    phases = np.exp(-1j * np.outer(x, p.k))
    f = phases @ (p.weights * np.sqrt(p.probabilities)) / math.sqrt(2 * math.pi)
    norm = float(np.sum(trapezoid_weights(x) * np.abs(f) ** 2))
    logger.debug(f'KickKernelNorm(norm={norm!r})')
    return CollapseShape.gridded(x, f / math.sqrt(norm))


def coherence_envelope(rho: ContinuumDensityOperator) -> np.ndarray:
    """|rho(x, x')| / sqrt(rho(x, x) rho(x', x')), zero where either density vanishes."""
    diag = np.clip(rho.diagonal(), 0.0, None)
    scale = np.sqrt(np.outer(diag, diag))
    out = np.zeros(rho.matrix.shape)
    mask = scale > 0
    out[mask] = np.abs(rho.matrix[mask]) / scale[mask]
    return out


def factorization_residual(rho: ContinuumDensityOperator, psi: WavefunctionGrid,
                           g: Callable[[np.ndarray], np.ndarray], width: Optional[float] = None) -> float:
    """Sup of |rho - psi^*(x) psi(x') g(x - x')| over |x - x'| <= 3 width, relative to max |rho|."""
    if rho.x.shape != psi.x.shape or not np.allclose(rho.x, psi.x):
        raise InvalidArgument('GridMismatch()')
    d = psi.x[:, None] - psi.x[None, :]
    model = np.outer(psi.amplitudes.conj(), psi.amplitudes) * g(d)
    diff = np.abs(rho.matrix - model)
    if width is not None:
        diff = np.where(np.abs(d) <= 3 * width, diff, 0.0)
    return float(diff.max() / np.abs(rho.matrix).max())


def _read_columns(path: str, names: Tuple[str, ...]) -> List[np.ndarray]:
    with click.open_file(path, 'r') as fd:
        reader = csv.DictReader(fd)
        missing = [n for n in names if n not in (reader.fieldnames or [])]
        if missing:
            raise InvalidArgument(f'MissingColumns(path={path},columns={",".join(missing)})')
        rows = [[float(row[n]) for n in names] for row in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return [data[:, i] for i in range(len(names))]


def read_wavefunction_csv(path: str) -> WavefunctionGrid:
    x, re, im = _read_columns(path, ('x', 're', 'im'))
    return WavefunctionGrid(x, re + 1j * im)


def read_shape_csv(path: str) -> CollapseShape:
    x, re, im = _read_columns(path, ('x', 're', 'im'))
    return CollapseShape.gridded(x, re + 1j * im)


def read_kicks_csv(path: str) -> KickDistribution:
    k, p = _read_columns(path, ('k', 'p'))
    return KickDistribution(k, p)
