#!/usr/bin/env python3

from typing import NamedTuple, Sequence

import numpy as np

from ..errors import InvalidArgument


class DecayFit(NamedTuple):
    rate: float
    amplitude: float
    residual: float


def fit_exponential_decay(times: Sequence[float], values: Sequence[float]) -> DecayFit:
    """Least-squares line through log|values|; residual is the worst relative misfit."""
    t = np.asarray(times, dtype=float)
    v = np.real_if_close(np.asarray(values))
    if np.iscomplexobj(v):
        raise InvalidArgument('ComplexSeries()')
    v = v.astype(float)
    if t.size < 3 or t.size != v.size:
        raise InvalidArgument(f'TooFewSamples(times={t.size},values={v.size})')
    if np.any(v == 0) or not (np.all(v > 0) or np.all(v < 0)):
        raise InvalidArgument('SignChangeOrZero()')

    slope, intercept = np.polyfit(t, np.log(np.abs(v)), 1)
    model = np.exp(intercept + slope * t)
    residual = float(np.max(np.abs(model - np.abs(v)) / np.abs(v)))
    return DecayFit(float(-slope), float(np.sign(v[0]) * np.exp(intercept)), residual)
