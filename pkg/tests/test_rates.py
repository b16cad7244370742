import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from locev import rates
from locev.errors import InvalidArgument
from locev.lattice import LocalizationKernel


def mirrored(half, sites):
    values = np.zeros(sites)
    for k in range(sites):
        values[k] = half[min(k, sites - k)]
    return values


@st.composite
def noise_models(draw, min_sites=1):
    sites = draw(st.integers(min_value=min_sites, max_value=64))
    half = draw(st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=sites // 2 + 1,
                         max_size=sites // 2 + 1))
    tau_c = draw(st.floats(min_value=0.0, max_value=5.0))
    return rates.NoiseModel.from_spectrum(tau_c, mirrored(half, sites))


def test_fbar_golden_values():
    assert rates.fbar_squared(LocalizationKernel.delta()) == 2.0
    three = rates.fbar_squared(LocalizationKernel.three_point())
    assert abs(three - (2 - math.sqrt(2))) <= 1e-6
    assert abs(three - 0.586) <= 5e-4


def test_fbar_on_ring_matches_chain():
    kernel = LocalizationKernel.three_point()
    assert rates.fbar_squared(kernel, sites=6) == pytest.approx(rates.fbar_squared(kernel), abs=1e-15)
    with pytest.raises(InvalidArgument, match='UnnormalizedKernel'):
        rates.fbar_squared(LocalizationKernel((0,), (2.0,)))


def test_cm_damping_rate():
    assert rates.cm_damping_rate(0.1) == pytest.approx(0.2)
    assert rates.cm_damping_rate(0.1, LocalizationKernel.delta()) == pytest.approx(0.2)
    with pytest.raises(InvalidArgument, match='NegativeRate'):
        rates.cm_damping_rate(-1.0)


@settings(max_examples=150, deadline=None)
@given(noise_models())
def test_gamma_representations_agree(noise):
    spectral = rates.gamma_from_spectrum(noise)
    realspace = rates.gamma_from_realspace(noise.converted())
    assert abs(spectral - realspace) <= 1e-10
    assert spectral >= -1e-12


@settings(max_examples=100, deadline=None)
@given(noise_models())
def test_noise_kernel_reproduces_gamma(noise):
    assert rates.noise_kernel_damping(noise) == pytest.approx(rates.gamma_from_spectrum(noise), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=2, max_value=64), st.floats(min_value=0.0, max_value=5.0),
       st.floats(min_value=0.0, max_value=10.0))
def test_flat_spectrum(sites, tau_c, variance):
    noise = rates.NoiseModel.flat(sites, tau_c, variance)
    assert rates.gamma_from_spectrum(noise) == pytest.approx(2 * tau_c * variance, abs=1e-10)
    assert rates.gamma_from_realspace(noise.converted()) == pytest.approx(2 * tau_c * variance, abs=1e-10)


def test_conversions_are_inverse():
    spectrum = np.array([0.5, 1.0, 0.0, 0.3, 0.0, 1.0])
    correlation = rates.realspace_from_spectrum(spectrum)
    np.testing.assert_allclose(rates.spectrum_from_realspace(correlation), spectrum, atol=1e-15)
    assert correlation[0] == pytest.approx(spectrum.mean())


def test_lindblad_kernel_correlation():
    noise = rates.NoiseModel.from_spectrum(0.2, [0.5, 1.0, 0.0, 0.3, 0.0, 1.0])
    rate, kernel = rates.lindblad_from_noise(noise)
    assert rate == pytest.approx(0.2 / 6)
    correlation = noise.as_correlation()
    for j in range(6):
        for jp in range(6):
            value = rate * sum(np.conj(kernel[(jp - l) % 6]) * kernel[(j - l) % 6] for l in range(6))
            assert value == pytest.approx(noise.tau_c * correlation[(j - jp) % 6], abs=1e-14)
    assert rates.gamma_from_spectrum(noise) == pytest.approx(0.8 / 6 * 0.8)


def test_noise_model_validation():
    with pytest.raises(InvalidArgument, match='AsymmetricNoise'):
        rates.NoiseModel.from_spectrum(1.0, [1.0, 2.0, 3.0])
    with pytest.raises(InvalidArgument, match='NegativeSpectrum'):
        rates.NoiseModel.from_correlation(1.0, [0.0, 1.0, 1.0])
    with pytest.raises(InvalidArgument, match='NoiseRepresentation'):
        rates.NoiseModel(2, 1.0)
    with pytest.raises(InvalidArgument, match='LengthMismatch'):
        rates.NoiseModel(3, 1.0, spectrum=np.ones(2))
    with pytest.raises(InvalidArgument, match='NegativeCorrelationTime'):
        rates.NoiseModel.flat(3, -1.0, 1.0)


def test_n_high_fit():
    assert rates.n_high_fit(0.0) == 0.01
    assert abs(rates.n_high_fit(10.0) - 0.38) <= 1e-12
    assert rates.n_high_fit(100.0) == 1.0
    assert rates.NHighFit(c0=0.0, c1=0.0, c2=0.0)(5.0) == 0.0
    with pytest.raises(InvalidArgument, match='NegativeDepth'):
        rates.n_high_fit(-1.0)


def test_gamma_prime_estimate():
    value = rates.gamma_prime_estimate(rates.BECEstimateInput(interaction=1.0, hopping=1.0, n_high=0.1))
    assert abs(value - 32 / 900) <= 1e-10
    assert abs(value - 0.0355556) <= 1e-7
    with pytest.raises(InvalidArgument, match='NonPositiveHopping'):
        rates.BECEstimateInput(1.0, 0.0, 0.1)
    with pytest.raises(InvalidArgument, match='InvalidFraction'):
        rates.BECEstimateInput(1.0, 1.0, 1.5)


def test_band_spectrum_bounds_estimate():
    spectrum = rates.band_spectrum(60, 80, 0.1)
    assert np.count_nonzero(spectrum) == 31
    assert spectrum.mean() == pytest.approx((80 * 0.1 / 60) ** 2)
    noise = rates.NoiseModel.from_spectrum(1.0, spectrum)
    general = rates.gamma_prime_general(noise, interaction=1.0)
    assert general == pytest.approx(rates.gamma_prime_general(noise, 1.0, representation='realspace'), abs=1e-12)
    estimate = rates.gamma_prime_estimate(rates.BECEstimateInput(1.0, 1.0, 0.1))
    assert 0.5 * estimate <= general <= estimate
    with pytest.raises(InvalidArgument, match='UnknownRepresentation'):
        rates.gamma_prime_general(noise, 1.0, representation='momentum')
    with pytest.raises(InvalidArgument, match='EmptyBand'):
        rates.band_spectrum(1, 1, 0.5)


def test_light_scattering_scaling():
    scaling = rates.light_scattering_scaling(rabi=2.0, detuning=4.0, linewidth=3.0)
    assert scaling.rate == pytest.approx(0.75)
    assert scaling.depth == pytest.approx(1.0)
    doubled = rates.light_scattering_scaling(2.0, 8.0, 3.0)
    assert doubled.rate / scaling.rate == pytest.approx(0.25)
    assert doubled.depth / scaling.depth == pytest.approx(0.5)
    with pytest.raises(InvalidArgument, match='ZeroDetuning'):
        rates.light_scattering_scaling(1.0, 0.0, 1.0)


def test_lattice_mapping():
    mapping = rates.LatticeMapping()
    interaction, hopping = rates.lattice_mapping(9.0, mapping)
    assert hopping == pytest.approx(4 / math.sqrt(math.pi) * 9 ** 0.75 * math.exp(-6))
    assert interaction == pytest.approx(0.05 * 9 ** 0.75)
    with pytest.raises(InvalidArgument, match='NonPositiveDepth'):
        mapping.hopping(0.0)


def test_gamma_prime_sweep_grows_with_depth():
    depths = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]
    rows = rates.gamma_prime_sweep(depths)
    assert [row.depth for row in rows] == depths
    values = [row.gamma_prime for row in rows]
    assert all(b > a for a, b in zip(values, values[1:]))
    interaction, hopping = rates.lattice_mapping(2.0)
    expected = 2 * interaction ** 2 * (80 * rates.n_high_fit(2.0) / 60) ** 2 / hopping
    assert rows[0].gamma_prime == pytest.approx(expected)


def test_read_noise_csv(tmp_path):
    spectrum = tmp_path / 'spectrum.csv'
    spectrum.write_text('k,weight\n2,0.0\n0,0.5\n1,1.0\n3,0.3\n4,0.0\n5,1.0\n')
    noise = rates.read_noise_csv(str(spectrum), tau_c=0.2)
    np.testing.assert_allclose(noise.as_spectrum(), [0.5, 1.0, 0.0, 0.3, 0.0, 1.0])

    correlation = tmp_path / 'correlation.csv'
    correlation.write_text('offset,correlation\n0,1.0\n1,0.25\n2,0.25\n')
    noise = rates.read_noise_csv(str(correlation), tau_c=1.0)
    assert noise.correlation is not None
    assert rates.gamma_from_realspace(noise) == pytest.approx(1.5)

    gap = tmp_path / 'gap.csv'
    gap.write_text('k,weight\n0,1.0\n2,1.0\n')
    with pytest.raises(InvalidArgument, match='IncompleteNoiseTable'):
        rates.read_noise_csv(str(gap), tau_c=1.0)
    other = tmp_path / 'other.csv'
    other.write_text('a,b\n0,1\n')
    with pytest.raises(InvalidArgument, match='MissingColumns'):
        rates.read_noise_csv(str(other), tau_c=1.0)


@st.composite
def kernels(draw):
    size = draw(st.integers(min_value=1, max_value=6))
    offsets = draw(st.lists(st.integers(min_value=-8, max_value=8), min_size=size, max_size=size, unique=True))
    parts = draw(st.lists(st.tuples(st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-1.0, max_value=1.0)),
                          min_size=size, max_size=size))
    amplitudes = np.array([complex(re, im) for re, im in parts])
    norm = np.linalg.norm(amplitudes)
    assume(norm > 1e-3)
    return LocalizationKernel(tuple(offsets), tuple(complex(a) for a in amplitudes / norm))


@settings(max_examples=150, deadline=None)
@given(kernels(), st.integers(min_value=-20, max_value=20), st.floats(min_value=-2 * math.pi, max_value=2 * math.pi))
def test_fbar_ignores_translation_and_phase(kernel, shift, phase):
    base = rates.fbar_squared(kernel)
    assert rates.fbar_squared(kernel.translated(shift)) == pytest.approx(base, rel=1e-12, abs=1e-12)
    assert rates.fbar_squared(kernel.with_phase(phase)) == pytest.approx(base, rel=1e-12, abs=1e-12)
    assert rates.fbar_squared(kernel.translated(shift), sites=40) == pytest.approx(base, rel=1e-12, abs=1e-12)
