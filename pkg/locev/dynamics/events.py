#!/usr/bin/env python3

import logging
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import InvalidArgument
from ..lattice import FockBasis, SparseOperator
from .state import DensityMatrix

logger = logging.getLogger(__name__)


def apply_localizing_event(state: Union[np.ndarray, DensityMatrix], jumps: Sequence[SparseOperator],
                           basis: Optional[FockBasis] = None) -> DensityMatrix:
    """Average over which event of the family happened.

    Event i occurs with probability <L_i^dag L_i> / sum_j <L_j^dag L_j> and leaves
    L_i rho L_i^dag / <L_i^dag L_i>, so the result is sum_i L_i rho L_i^dag / sum_j <L_j^dag L_j>.
    """
    if isinstance(state, DensityMatrix):
        rho = state.matrix
        basis = basis or state.basis
    else:
        psi = np.asarray(state, dtype=complex)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-9:
            raise InvalidArgument(f'UnnormalizedState(norm={norm!r})')
        rho = np.outer(psi, psi.conj())
    if not jumps:
        raise InvalidArgument('EmptyJumpFamily()')

    out = np.zeros_like(rho, dtype=complex)
    total = 0.0
    for op in jumps:
        if op.shape != rho.shape:
            raise InvalidArgument(f'DimensionMismatch(jump={op.shape},state={rho.shape})')
        l = op.matrix
        jumped = l @ (l @ rho.conj().T).conj().T
        weight = float(np.real(np.trace(jumped)))
        total += weight
        out += jumped
    if total <= 0:
        raise InvalidArgument('NoEventPossible(sum<LdagL>=0)')
    logger.debug(f'LocalizingEvent(family={len(jumps)},total_weight={total:.6g})')
    return DensityMatrix(out / total, basis)
