import math

import pytest

from resetq.analytics.models import ADDITIVE, MULTIPLICATIVE, ServiceModel
from resetq.analytics.optimize import (
    NOT_BENEFICIAL,
    optimal_poisson_rate,
    optimal_sharp_period,
    poisson_bracket,
    sharp_bracket,
)
from resetq.analytics.service import mean_poisson, mean_sharp
from resetq.common.errors import NonCompletingError
from resetq.distributions import Deterministic, Exponential, Gamma, LogNormal

WEB_PAGE_SIZE = 575.184


def test_gamma_additive_optimal_rate(gamma_additive):
    report = optimal_poisson_rate(gamma_additive)
    assert report.parameter == 'rate'
    assert report.argmin == pytest.approx(0.2424, rel=1e-2)
    assert report.mean < report.mean_no_reset
    assert report.mean == pytest.approx(mean_poisson(gamma_additive, report.argmin))
    assert not report.monotone


def test_inverse_gaussian_multiplicative_optimal_rate(ig_multiplicative):
    report = optimal_poisson_rate(ig_multiplicative)
    assert report.argmin == pytest.approx(1.372, rel=1e-2)
    assert report.improvement > 0.0


def test_sharp_beats_poisson(ig_multiplicative):
    poisson = optimal_poisson_rate(ig_multiplicative)
    sharp = optimal_sharp_period(ig_multiplicative)
    assert math.isfinite(sharp.argmin)
    assert sharp.mean <= poisson.mean
    assert sharp.mean == pytest.approx(mean_sharp(ig_multiplicative, sharp.argmin))


def test_no_benefit_means_no_resetting(exponential_multiplicative):
    rate = optimal_poisson_rate(exponential_multiplicative)
    assert rate.argmin == 0.0
    assert rate.monotone
    assert rate.note == NOT_BENEFICIAL
    assert rate.to_dict()['optimum'] == 0.0

    period = optimal_sharp_period(exponential_multiplicative)
    assert period.argmin == math.inf
    assert period.mean == period.mean_no_reset


def test_rate_bracket_stays_inside_regularity_region():
    m = ServiceModel(ADDITIVE, Gamma(0.01, 50.0), Exponential(1.0))
    bracket = poisson_bracket(m, 1.5)
    assert bracket.hi <= 0.999
    assert bracket.lo > 0.0


def test_sharp_bracket_needs_bounded_additive_jobs():
    with pytest.raises(NonCompletingError):
        sharp_bracket(ServiceModel(ADDITIVE, Gamma(0.01, 50.0), Exponential(1.0)))
    bracket = sharp_bracket(ServiceModel(ADDITIVE, Gamma(0.01, 50.0), Deterministic(2.0 / 3.0)))
    assert bracket.lo > 2.0 / 3.0


@pytest.mark.slow
def test_web_page_refresh_interval():
    # times in milliseconds; the median slowdown-scaled load time is e^5.97 ms
    m = ServiceModel(MULTIPLICATIVE, LogNormal(5.97 - math.log(WEB_PAGE_SIZE), 0.99),
                     Deterministic(WEB_PAGE_SIZE))
    poisson = optimal_poisson_rate(m)
    sharp = optimal_sharp_period(m)
    assert 0.5 <= 1000.0 * poisson.argmin <= 2.0
    assert 0.5 <= 1000.0 / sharp.argmin <= 2.0
    assert sharp.mean <= poisson.mean < poisson.mean_no_reset
