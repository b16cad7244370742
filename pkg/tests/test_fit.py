import numpy as np
import pytest

from locev.dynamics import fit_exponential_decay
from locev.errors import InvalidArgument


def test_exact_exponential():
    t = np.linspace(0, 5, 26)
    fit = fit_exponential_decay(t, 1.7 * np.exp(-0.3 * t))
    assert fit.rate == pytest.approx(0.3, rel=1e-12)
    assert fit.amplitude == pytest.approx(1.7, rel=1e-12)
    assert fit.residual < 1e-12


def test_negative_series():
    t = np.linspace(0, 2, 11)
    fit = fit_exponential_decay(t, -2.0 * np.exp(-0.5 * t))
    assert fit.rate == pytest.approx(0.5)
    assert fit.amplitude == pytest.approx(-2.0)


def test_noisy_residual():
    t = np.linspace(0, 4, 9)
    values = np.exp(-t) * (1 + 0.01 * np.cos(7 * t))
    fit = fit_exponential_decay(t, values)
    assert fit.rate == pytest.approx(1.0, rel=1e-2)
    assert 0 < fit.residual < 0.03


@pytest.mark.parametrize('times,values', [
    ([0, 1], [1.0, 0.5]),
    ([0, 1, 2], [1.0, -0.5, 0.25]),
    ([0, 1, 2], [1.0, 0.0, 0.25]),
    ([0, 1, 2], [1.0, 0.5]),
])
def test_rejected_series(times, values):
    with pytest.raises(InvalidArgument):
        fit_exponential_decay(times, values)


def test_complex_series_rejected():
    with pytest.raises(InvalidArgument, match='ComplexSeries'):
        fit_exponential_decay([0, 1, 2], [1.0, 0.5 + 0.1j, 0.25])
