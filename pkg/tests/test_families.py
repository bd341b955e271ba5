import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from resetq.common.errors import AtomDensityError, DivergentTransformError, NonFiniteError, ValidationError
from resetq.distributions import (
    Deterministic,
    DistributionSpec,
    Exponential,
    Gamma,
    InverseGaussian,
    LogNormal,
    RngStream,
    density_cdf,
    laplace,
    moment,
)
from resetq.numerics import finite_difference

FAMILIES = [
    Exponential(2.0),
    Gamma(2.5, 0.4),
    InverseGaussian(1.5, 0.75),
    LogNormal(-0.3, 0.6),
    Deterministic(0.7),
]


@pytest.mark.parametrize('d', FAMILIES, ids=lambda d: d.kind)
def test_dict_round_trip(d):
    assert DistributionSpec.from_dict(d.to_dict()) == d


def test_from_dict_is_strict():
    with pytest.raises(ValidationError):
        DistributionSpec.from_dict({'kind': 'gamma', 'shape': 1.0, 'scale': 1.0, 'rate': 2.0})
    with pytest.raises(ValidationError):
        DistributionSpec.from_dict({'kind': 'gamma', 'shape': 1.0})
    with pytest.raises(ValidationError):
        DistributionSpec.from_dict({'kind': 'weibull', 'shape': 1.0})


@pytest.mark.parametrize('data', [
    {'kind': 'exponential', 'rate': 0.0},
    {'kind': 'gamma', 'shape': -1.0, 'scale': 1.0},
    {'kind': 'lognormal', 'mu': 0.0, 'sigma': 0.0},
    {'kind': 'deterministic', 'value': -1.0},
    {'kind': 'inverse_gaussian', 'mean': 1.0, 'shape': float('nan')},
    {'kind': 'exponential', 'rate': True},
])
def test_invalid_parameters(data):
    with pytest.raises(ValidationError):
        DistributionSpec.from_dict(data)


def test_closed_form_moments():
    assert moment(Exponential(2.0), 2) == pytest.approx(0.5)
    assert moment(Gamma(2.0, 0.5), 3) == pytest.approx(2.0 * 3.0 * 4.0 * 0.125)
    ig = InverseGaussian(1.5, 0.75)
    assert ig.variance == pytest.approx(4.5)
    assert ig.moment(2) == pytest.approx(4.5 + 2.25)
    assert LogNormal(0.0, 1.0).moment(2) == pytest.approx(math.exp(2.0))
    assert Deterministic(3.0).moment(4) == 81.0


def test_gamma_and_exponential_transforms():
    assert laplace(Gamma(2.0, 0.5), 1.0).value == pytest.approx(1.5 ** -2)
    jet = Exponential(2.0).laplace(1.0, 2)
    # E[T e^{-T}] = 2/9 and E[T^2 e^{-T}] = 4/27 for rate 2
    assert jet.coeffs == pytest.approx([2.0 / 3.0, -2.0 / 9.0, 2.0 / 27.0])


def test_transform_at_zero_carries_moments():
    d = Gamma(3.0, 0.2)
    jet = d.laplace(0.0, 2)
    assert jet.coeffs == pytest.approx([1.0, -d.mean, 0.5 * d.moment(2)])


def test_inverse_gaussian_transform_matches_quadrature():
    d = InverseGaussian(1.5, 0.75)
    s = 0.8
    numeric = d.expect(lambda t: math.exp(-s * t), rel_tol=1e-9)
    assert d.laplace(s).value == pytest.approx(numeric, rel=1e-7)


@pytest.mark.parametrize('s', [0.05, 1.0, 5.0])
def test_lognormal_transform_matches_quadrature(s):
    d = LogNormal(-0.3, 0.6)
    numeric = d.expect(lambda t: math.exp(-s * t), rel_tol=1e-9)
    assert d.laplace(s).value == pytest.approx(numeric, rel=1e-6)


def test_deficit_is_accurate_for_tiny_arguments():
    assert Exponential(1.0).laplace_deficit(1e-12) == pytest.approx(1e-12, rel=1e-9)
    assert Gamma(0.01, 50.0).laplace_deficit(1e-12) == pytest.approx(0.5e-12, rel=1e-6)
    assert LogNormal(0.0, 0.5).laplace_deficit(1e-9) == pytest.approx(math.exp(0.125) * 1e-9, rel=1e-6)


def test_negative_arguments_inside_and_outside_regularity_region():
    assert Exponential(2.0).laplace(-1.0).value == pytest.approx(2.0)
    with pytest.raises(DivergentTransformError):
        Exponential(2.0).laplace(-2.0)
    ig = InverseGaussian(1.0, 2.0)
    assert ig.laplace(-1.0).value == pytest.approx(math.e ** 2)
    with pytest.raises(DivergentTransformError):
        ig.laplace(-1.0, order=1)
    with pytest.raises(DivergentTransformError):
        LogNormal(0.0, 1.0).laplace(-1e-6)


def test_atom_has_no_density():
    d = Deterministic(2.0)
    with pytest.raises(AtomDensityError):
        density_cdf(d, 2.0)
    assert d.pdf(1.0) == 0.0
    assert d.cdf(2.0) == 1.0
    assert d.prob_below(2.0) == 0.0
    assert d.prob_below(2.0 + 1e-12) == 1.0


def test_partial_expectation():
    d = Exponential(1.0)
    for c in (0.3, 2.0, 8.0):
        assert d.partial_expectation(c) == pytest.approx(1.0 - math.exp(-c) * (1.0 + c), rel=1e-8)
    assert d.partial_expectation(0.0) == 0.0
    assert d.partial_expectation(math.inf) == 1.0

    g = Gamma(0.5, 2.0)
    numeric = g.expect(lambda t: t * (t < 0.2), rel_tol=1e-8, points=[0.2])
    assert g.partial_expectation(0.2) == pytest.approx(numeric, rel=1e-6)


def test_with_mean_keeps_coefficient_of_variation():
    for d in FAMILIES:
        rescaled = d.with_mean(3.0)
        assert rescaled.mean == pytest.approx(3.0)
        assert rescaled.cv == pytest.approx(d.cv)


def test_samples_match_moments():
    rng = RngStream(11)
    for d in (Gamma(2.0, 0.5), InverseGaussian(1.5, 0.75), LogNormal(0.0, 0.5)):
        draws = d.sample(rng, 200000)
        se = math.sqrt(d.variance / draws.size)
        assert abs(draws.mean() - d.mean) < 5.0 * se
    assert np.all(Deterministic(0.25).sample(rng, 5) == 0.25)


def _log_lognormal_transform(mu, sigma, s):
    """log E[exp(-s T)] for log T = mu + sigma * U, by adaptive quadrature over U."""
    def log_integrand(u):
        return -0.5 * u * u - s * math.exp(mu + sigma * u)

    peak = optimize.minimize_scalar(lambda u: -log_integrand(u), bounds=(-40.0, 40.0), method='bounded',
                                    options={'xatol': 1e-10}).x
    top = log_integrand(peak)
    value, _ = integrate.quad(lambda u: math.exp(log_integrand(u) - top), peak - 15.0, peak + 15.0,
                              points=[peak], epsabs=0.0, epsrel=1e-12, limit=400)
    return top + math.log(value) - 0.5 * math.log(2.0 * math.pi)


LOGNORMAL_GRID = [10.0 ** e for e in range(-8, 4)]


@pytest.mark.parametrize('sigma', [0.5, 0.99, 1.5, 2.0])
def test_lognormal_transform_over_wide_argument_range(sigma):
    d = LogNormal(0.0, sigma)
    values = [d.laplace(s).value for s in LOGNORMAL_GRID]
    for s, value in zip(LOGNORMAL_GRID, values):
        assert math.log(value) == pytest.approx(_log_lognormal_transform(0.0, sigma, s), abs=1e-7)
    assert all(b < a for a, b in zip(values, values[1:]))


def test_lognormal_transform_jet_at_small_argument():
    jet = LogNormal(0.0, 0.99).laplace(0.01, 4)
    assert np.all(np.isfinite(jet.coeffs))
    assert jet.value == pytest.approx(math.exp(_log_lognormal_transform(0.0, 0.99, 0.01)), rel=1e-7)


@pytest.mark.parametrize('d', FAMILIES[:-1], ids=lambda d: d.kind)
def test_sampler_matches_cdf(d):
    draws = d.sample(RngStream(17, 3), 5000)
    assert stats.kstest(draws, d.law.cdf).pvalue > 1e-3


@pytest.mark.parametrize('d', FAMILIES, ids=lambda d: d.kind)
def test_transform_decreases_in_its_argument(d):
    values = [d.laplace(s).value for s in np.linspace(0.0, 20.0, 41)]
    assert values[0] == 1.0
    assert all(b < a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize('d', FAMILIES, ids=lambda d: d.kind)
@pytest.mark.parametrize('s', [0.5, 2.0])
def test_transform_slope_matches_jet(d, s):
    numeric = finite_difference(lambda v: d.laplace(v).value, s)
    assert d.laplace(s, 1).coeffs[1] == pytest.approx(numeric, rel=1e-5)


def test_overflowing_transforms_are_domain_errors():
    with pytest.raises(NonFiniteError):
        Deterministic(1.0).laplace_deficit(-800.0)
    with pytest.raises(NonFiniteError):
        Deterministic(1.0).laplace(-800.0)
