import math

import numpy as np
import pytest
from scipy import stats as sps

from resetq.analytics.models import ADDITIVE, MULTIPLICATIVE, ResetPolicy, ServiceModel
from resetq.analytics.service import completion_probability, mean_no_reset, mean_poisson, mean_under
from resetq.common.errors import AttemptBudgetExceededError, ValidationError
from resetq.distributions import Deterministic, Exponential, Gamma, InverseGaussian, LogNormal, RngStream
from resetq.mg1.pk import QueueSpec, mean_queue_length, queue_length_pmf
from resetq.simulation.engine import (
    SimConfig,
    estimate_service,
    run_replication,
    sample_service_time,
    sample_service_times,
    simulate,
)
from resetq.simulation.stats import Estimate, compare, pmf_chi_square


def test_no_resetting_means_one_attempt(ig_multiplicative):
    totals, attempts = sample_service_times(ig_multiplicative, ResetPolicy.none(), RngStream(1), 1000)
    assert np.all(attempts == 1)
    assert np.all(totals > 0.0)


def test_sharp_attempts_are_cut_at_the_period():
    m = ServiceModel(ADDITIVE, Exponential(1.0), Deterministic(1.0))
    totals, attempts = sample_service_times(m, ResetPolicy.sharp(2.0), RngStream(2), 5000)
    last_attempt = totals - 2.0 * (attempts - 1)
    assert np.all(last_attempt >= 1.0)
    assert np.all(last_attempt < 2.0)
    assert attempts.max() > 1


def test_single_job_sample():
    m = ServiceModel(MULTIPLICATIVE, Deterministic(2.0), Deterministic(1.5))
    assert sample_service_time(m, ResetPolicy.poisson(1e-9), RngStream(3)) == (3.0, 1)


def test_period_below_every_requirement():
    m = ServiceModel(ADDITIVE, Exponential(1.0), Deterministic(1.0))
    with pytest.raises(AttemptBudgetExceededError):
        sample_service_times(m, ResetPolicy.sharp(0.5), RngStream(4), 10)


def test_attempt_budget():
    m = ServiceModel(MULTIPLICATIVE, Exponential(1.0), Deterministic(1.0))
    with pytest.raises(AttemptBudgetExceededError):
        sample_service_times(m, ResetPolicy.poisson(50.0), RngStream(5), 100, max_attempts=2)


def test_service_estimate_agrees_with_poisson_mean(ig_multiplicative):
    policy = ResetPolicy.poisson(1.372)
    service, attempts = estimate_service(ig_multiplicative, policy, RngStream(6), 200000)
    assert abs(service.z_score(mean_poisson(ig_multiplicative, 1.372))) < 4.0
    expected_attempts = 1.0 / completion_probability(ig_multiplicative, policy, 2.0 / 3.0)
    assert abs(attempts.z_score(expected_attempts)) < 4.0


def test_service_estimate_needs_enough_jobs(ig_multiplicative):
    with pytest.raises(ValidationError):
        estimate_service(ig_multiplicative, ResetPolicy.none(), RngStream(7), 10)


@pytest.mark.parametrize('kwargs', [
    {'horizon': 0.0},
    {'horizon': 10.0, 'warmup_fraction': 0.9},
    {'horizon': 10.0, 'replications': 0},
    {'horizon': 10.0, 'seed': -1},
    {'horizon': 10.0, 'max_attempts': 0},
])
def test_invalid_config(exponential_multiplicative, kwargs):
    with pytest.raises(ValidationError):
        SimConfig(QueueSpec(0.5, exponential_multiplicative), **kwargs)


def test_deterministic_queue_time_average():
    service = ServiceModel(MULTIPLICATIVE, Deterministic(1.0), Deterministic(1.0))
    cfg = SimConfig(QueueSpec(0.5, service), horizon=2000.0, replications=2, arrival_law=Deterministic(2.0))
    stats = simulate(cfg)
    assert stats.mean_queue_length.mean == pytest.approx(0.5, abs=1e-3)
    assert stats.queue_length_histogram[:2] == pytest.approx([0.5, 0.5], abs=1e-3)
    assert stats.mean_sojourn.mean == pytest.approx(1.0)
    assert stats.attempts_per_job.mean == 1.0


def test_replications_are_reproducible(exponential_multiplicative):
    cfg = SimConfig(QueueSpec(0.5, exponential_multiplicative), horizon=500.0, replications=3, seed=99)
    first, again = run_replication(cfg, 1), run_replication(cfg, 1)
    assert first['mean_queue_length'] == again['mean_queue_length']
    assert np.array_equal(first['histogram'], again['histogram'])
    assert run_replication(cfg, 2)['mean_queue_length'] != first['mean_queue_length']

    def reversed_mapper(fn, items):
        items = list(items)
        return [fn(i) for i in reversed(items)][::-1]

    serial, shuffled = simulate(cfg), simulate(cfg, reversed_mapper)
    assert serial.to_dict() == shuffled.to_dict()


def test_mm1_simulation(exponential_multiplicative):
    q = QueueSpec(0.5, exponential_multiplicative)
    stats = simulate(SimConfig(q, horizon=20000.0, replications=5, seed=7))
    assert abs(stats.mean_queue_length.z_score(1.0)) < 4.0
    assert abs(stats.mean_sojourn.z_score(2.0)) < 4.0
    assert abs(stats.mean_service.z_score(1.0)) < 4.0
    assert stats.queue_length_histogram.sum() == pytest.approx(1.0)
    assert not stats.growing_queue


def test_compare_rows(exponential_multiplicative):
    q = QueueSpec(0.5, exponential_multiplicative)
    stats = simulate(SimConfig(q, horizon=5000.0, replications=4, seed=3))
    report = compare(stats, {
        'mean_queue_length': mean_queue_length(q),
        'queue_length_pmf': queue_length_pmf(q, N=3).probs,
        'unknown_quantity': 1.0,
    })
    names = [row.quantity for row in report.rows]
    assert names == ['mean_queue_length', 'P_L(0)', 'P_L(1)', 'P_L(2)', 'P_L(3)']
    assert report.to_dict()['all_passed'] == report.all_passed


def test_estimate_from_samples():
    est = Estimate.from_samples([1.0, 2.0, 3.0])
    assert est.mean == 2.0
    assert est.half_width == pytest.approx(4.302652729911275 / math.sqrt(3.0))
    assert est.covers(2.5)
    assert Estimate.from_samples([1.0]).half_width == math.inf


@pytest.mark.slow
@pytest.mark.parametrize('fixture, arrival_rate, rate', [
    ('gamma_additive', 0.5, 0.2424),
    ('ig_multiplicative', 0.75, 1.372),
])
def test_simulation_corroborates_analytic_queue(request, fixture, arrival_rate, rate):
    q = QueueSpec(arrival_rate, request.getfixturevalue(fixture), ResetPolicy.poisson(rate))
    stats = simulate(SimConfig(q, horizon=100000 / arrival_rate, replications=20, seed=20240101))
    assert abs(stats.mean_queue_length.z_score(mean_queue_length(q))) < 4.0
    assert abs(stats.mean_service.z_score(mean_poisson(q.service, rate))) < 4.0

    assert pmf_chi_square(stats, queue_length_pmf(q, N=30).probs).passed


def test_chi_square_flags_a_wrong_pmf(exponential_multiplicative):
    q = QueueSpec(0.5, exponential_multiplicative)
    stats = simulate(SimConfig(q, horizon=20000.0, replications=10, seed=8))
    shifted = 0.6 * 0.4 ** np.arange(12)
    result = pmf_chi_square(stats, shifted)
    assert result.dof == 5
    assert not result.passed

    report = compare(stats, {'queue_length_pmf': shifted})
    assert report.chi_square.dof == result.dof
    assert not report.all_passed
    assert report.to_dict()['pmf_chi_square']['passed'] is False


def test_chi_square_needs_replications(exponential_multiplicative):
    q = QueueSpec(0.5, exponential_multiplicative)
    stats = simulate(SimConfig(q, horizon=2000.0, replications=1, seed=8))
    with pytest.raises(ValidationError):
        pmf_chi_square(stats, queue_length_pmf(q, N=5).probs)


@pytest.mark.slow
def test_mm1_histogram_is_geometric(exponential_multiplicative):
    # 5 x 2e5 time units at lambda = 1/2: about 1e6 arrival and departure events
    q = QueueSpec(0.5, exponential_multiplicative)
    stats = simulate(SimConfig(q, horizon=200000.0, replications=5, seed=12))
    result = pmf_chi_square(stats, 0.5 ** (np.arange(40) + 1))
    assert result.dof == 6
    assert result.passed


def _random_service_scenario(rng):
    combiner = MULTIPLICATIVE if rng.random() < 0.5 else ADDITIVE
    slowdowns = [
        lambda: Exponential(rng.uniform(0.5, 2.0)),
        lambda: Gamma(rng.uniform(0.5, 3.0), rng.uniform(0.3, 1.0)),
        lambda: InverseGaussian(rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0)),
        lambda: LogNormal(rng.uniform(-0.5, 0.5), rng.uniform(0.2, 0.8)),
    ]
    slowdown = slowdowns[rng.integers(len(slowdowns))]()
    if combiner == MULTIPLICATIVE and rng.random() < 0.5:
        jobsize = Gamma(rng.uniform(2.0, 5.0), 0.2)
    else:
        jobsize = Deterministic(rng.uniform(0.3, 1.5))
    m = ServiceModel(combiner, slowdown, jobsize)

    choice = rng.integers(3)
    if choice == 0:
        policy = ResetPolicy.none()
    elif choice == 1 or not isinstance(jobsize, Deterministic):
        policy = ResetPolicy.poisson(rng.uniform(0.1, 1.5))
    else:
        policy = ResetPolicy.sharp(mean_no_reset(m) * rng.uniform(1.5, 3.0) + jobsize.value)
    return m, policy


@pytest.mark.slow
def test_service_confidence_intervals_cover_analytic_means():
    rng = np.random.default_rng(4242)
    scenarios = [_random_service_scenario(rng) for _ in range(100)]
    covered = 0
    for index, (m, policy) in enumerate(scenarios):
        service, _ = estimate_service(m, policy, RngStream(31, index), 4000)
        covered += service.covers(mean_under(m, policy))
    assert covered >= sps.binom.ppf(1e-3, len(scenarios), 0.95)
