#!/usr/bin/env python3

import logging
from concurrent import futures
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from ..errors import InvalidArgument
from ..lattice import SparseOperator
from .state import EvolutionSpec, TimeSeriesRecord, TrajectoryConfig

logger = logging.getLogger(__name__)

MAX_JUMP_PROBABILITY = 0.1
NORMALITY_TOLERANCE = 1e-12

Observable = Tuple[str, SparseOperator]


class StepTooLarge(InvalidArgument):
    def __init__(self, probability: float, dt: float) -> None:
        super().__init__(f'StepTooLarge(jump_probability={probability:.4f},dt={dt},max={MAX_JUMP_PROBABILITY})')
        self.probability = probability


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    times: np.ndarray
    labels: Tuple[str, ...]
    mean: np.ndarray
    stderr: np.ndarray
    jumps: int

    def series(self, label: str) -> Tuple[np.ndarray, np.ndarray]:
        idx = self.labels.index(label)
        return self.mean[idx], self.stderr[idx]

    def records(self) -> List[TimeSeriesRecord]:
        rows: List[TimeSeriesRecord] = []
        for ti, t in enumerate(self.times):
            for oi, label in enumerate(self.labels):
                value = self.mean[oi, ti]
                rows.append(TimeSeriesRecord(float(t), label, float(value.real), float(value.imag),
                                             float(self.stderr[oi, ti])))
        return rows


class _Unraveling:
    """Jump/no-jump unraveling of the factor-2 Lindblad form.

    The drift is H - i sum r L^dag L; the norm it loses over one step is the jump
    probability, 2 r dt <L^dag L> to first order.
    """

    def __init__(self, spec: EvolutionSpec, dt: float):
        self.dt = dt
        h_eff = spec.hamiltonian.dense().astype(complex)
        self.jumps: List[Tuple[float, SparseOperator]] = []
        for rate, op in spec.dissipators:
            if rate == 0:
                continue
            normality = (op @ op.dagger() - op.dagger() @ op).norm()
            if normality > NORMALITY_TOLERANCE:
                raise InvalidArgument(f'NonNormalJump(deviation={normality:.3e})')
            h_eff = h_eff - 1j * rate * (op.dagger() @ op).dense()
            self.jumps.append((rate, op))
        self.propagator = expm(-1j * h_eff * dt)

    def run(self, psi0: np.ndarray, rngs: Sequence[np.random.Generator], steps: int,
            record_steps: Sequence[int], observables: Sequence[Observable]) -> Tuple[np.ndarray, int]:
        """Propagate one batch, one generator per trajectory drawing two uniforms per step."""
        batch = len(rngs)
        psi = np.tile(psi0, (batch, 1))
        values = np.zeros((batch, len(observables), len(record_steps)), dtype=complex)
        slots = {s: i for i, s in enumerate(record_steps)}
        jumps = 0
        if 0 in slots:
            values[:, :, slots[0]] = self._measure(psi, observables)
        for step in range(1, steps + 1):
            uniforms = np.stack([rng.random(2) for rng in rngs])
            drifted = psi @ self.propagator.T
            norms = np.sum(np.abs(drifted) ** 2, axis=1)
            if self.jumps:
                p_jump = 1.0 - norms
                worst = float(np.max(p_jump))
                if worst > MAX_JUMP_PROBABILITY:
                    raise StepTooLarge(worst, self.dt)
                jumped = uniforms[:, 0] < p_jump
            else:
                jumped = np.zeros(batch, dtype=bool)
            psi_next = drifted / np.sqrt(norms)[:, None]
            for row in np.flatnonzero(jumped):
                psi_next[row] = self._jump(psi[row], uniforms[row, 1])
            jumps += int(np.count_nonzero(jumped))
            psi = psi_next
            if step in slots:
                values[:, :, slots[step]] = self._measure(psi, observables)
        return values, jumps

    def _jump(self, psi: np.ndarray, u: float) -> np.ndarray:
        images = [op.apply(psi) for _, op in self.jumps]
        weights = np.array([rate * np.vdot(img, img).real for (rate, _), img in zip(self.jumps, images)])
        choice = int(np.searchsorted(np.cumsum(weights) / weights.sum(), u, side='right'))
        choice = min(choice, len(images) - 1)
        image = images[choice]
        return image / np.linalg.norm(image)

    @staticmethod
    def _measure(psi: np.ndarray, observables: Sequence[Observable]) -> np.ndarray:
        out = np.zeros((psi.shape[0], len(observables)), dtype=complex)
        for idx, (_, op) in enumerate(observables):
            out[:, idx] = np.sum(psi.conj() * (op.matrix @ psi.T).T, axis=1)
        return out


def mcwf_sample(psi0: np.ndarray, spec: EvolutionSpec, config: TrajectoryConfig,
                observables: Sequence[Observable]) -> TrajectoryResult:
    """Ensemble means and standard errors over independent quantum trajectories.

    Trajectory i draws from the i-th child of SeedSequence(seed), and results are
    reduced in trajectory order, so output does not depend on the thread count.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise InvalidArgument(f'UnnormalizedState(norm={np.linalg.norm(psi0)!r})')
    if psi0.shape != (spec.dim,):
        raise InvalidArgument(f'DimensionMismatch(psi={psi0.shape},H={spec.dim})')

    dt = config.dt
    steps = int(round(spec.total_time / dt))
    record_steps = sorted(set(list(range(0, steps + 1, spec.record_every)) + [steps]))
    unraveling = _Unraveling(spec, dt)
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(config.seed).spawn(config.count)]

    threads = max(1, min(config.threads, config.count))
    bounds = np.linspace(0, config.count, threads + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with futures.ThreadPoolExecutor(max_workers=threads) as executor:
        items = [executor.submit(unraveling.run, psi0, rngs[lo:hi], steps, record_steps, observables)
                 for lo, hi in chunks]
        results = [item.result() for item in items]

    values = np.concatenate([v for v, _ in results], axis=0)
    jumps = sum(j for _, j in results)
    mean = values.mean(axis=0)
    if config.count > 1:
        spread = values.real.var(axis=0, ddof=1) + values.imag.var(axis=0, ddof=1)
        stderr = np.sqrt(spread / config.count)
    else:
        stderr = np.zeros(mean.shape)
    logger.info(f'Trajectories(count={config.count},steps={steps},jumps={jumps},threads={threads})')
    return TrajectoryResult(np.array(record_steps) * dt, tuple(label for label, _ in observables),
                            mean, stderr, jumps)
