"""
Single-server FCFS queue with S&X service and per-attempt resetting.

Every attempt draws a fresh slowdown and (for random policies) a fresh
resetting time; the job size stays fixed for the whole job. Attempts of
all pending jobs are drawn together, one round at a time. Departures follow
the Lindley recursion and the number in system is time-averaged over the
post-warm-up window.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from resetq.analytics.models import ResetPolicy, ServiceModel, positive_number
from resetq.common.errors import AttemptBudgetExceededError, ValidationError
from resetq.distributions import DistributionSpec, RngStream
from resetq.distributions.rng import MAX_SEED
from resetq.mg1.pk import QueueSpec
from resetq.simulation.stats import Estimate, SimStats, histogram_estimate

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 10 ** 9
ARRIVAL_STREAM = 0
SERVICE_STREAM = 1


@dataclass(frozen=True)
class SimConfig:
    queue: QueueSpec
    horizon: float
    warmup_fraction: float = 0.1
    replications: int = 20
    seed: int = 0
    arrival_law: Optional[DistributionSpec] = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        object.__setattr__(self, 'horizon', positive_number(self.horizon, 'sim.horizon'))
        if not 0.0 <= self.warmup_fraction <= 0.5:
            raise ValidationError(f'sim.warmup_fraction must lie in [0, 0.5], got {self.warmup_fraction}')
        if isinstance(self.replications, bool) or not isinstance(self.replications, int) or self.replications < 1:
            raise ValidationError(f'sim.replications must be a positive integer, got {self.replications!r}')
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= MAX_SEED:
            raise ValidationError(f'sim.seed must be an unsigned 64-bit integer, got {self.seed!r}')
        if isinstance(self.max_attempts, bool) or not isinstance(self.max_attempts, int) or self.max_attempts < 1:
            raise ValidationError(f'sim.max_attempts must be a positive integer, got {self.max_attempts!r}')

    def to_dict(self):
        rv = {
            'horizon': self.horizon,
            'warmup_fraction': self.warmup_fraction,
            'replications': self.replications,
            'seed': self.seed,
            'max_attempts': self.max_attempts,
        }
        if self.arrival_law is not None:
            rv['arrival_law'] = self.arrival_law.to_dict()
        return rv


def _check_completion(m: ServiceModel, policy: ResetPolicy, x: np.ndarray):
    """Raise when some job can never beat a fixed period."""
    R = policy.reset_law
    if R is None or not R.is_atom:
        return
    lowest = m.requirement(x, m.slowdown.support_lower)
    if np.any(lowest >= R.value):
        raise AttemptBudgetExceededError(
            f'Requirement of a job of size {float(np.max(x)):g} is never below the period {R.value:g}'
        )


def sample_service_times(m: ServiceModel, policy: ResetPolicy, rng: RngStream, n: int,
                         max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Tuple[np.ndarray, np.ndarray]:
    """Total service times and attempt counts of n independent jobs."""
    x = np.atleast_1d(m.jobsize.sample(rng, n))
    totals = np.zeros(n)
    attempts = np.zeros(n, dtype=np.int64)
    _check_completion(m, policy, x)

    R = policy.reset_law
    pending = np.arange(n)
    rounds = 0
    while pending.size:
        if rounds >= max_attempts:
            raise AttemptBudgetExceededError(f'{pending.size} jobs still unfinished after {max_attempts} attempts')
        rounds += 1
        requirement = m.requirement(x[pending], m.slowdown.sample(rng, pending.size))
        if R is None:
            totals[pending] += requirement
            attempts[pending] += 1
            break
        cut = R.sample(rng, pending.size)
        done = requirement < cut
        totals[pending] += np.where(done, requirement, cut)
        attempts[pending] += 1
        pending = pending[~done]
    return totals, attempts


def sample_service_time(m: ServiceModel, policy: ResetPolicy, rng: RngStream,
                        max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> Tuple[float, int]:
    totals, attempts = sample_service_times(m, policy, rng, 1, max_attempts)
    return float(totals[0]), int(attempts[0])


def estimate_service(m: ServiceModel, policy: ResetPolicy, rng: RngStream, n: int,
                     max_attempts: int = DEFAULT_MAX_ATTEMPTS, batches: int = 20) -> Tuple[Estimate, Estimate]:
    """Mean service time and attempts per job from n jobs, with CIs over equal batches."""
    if n < batches:
        raise ValidationError(f'Need at least {batches} jobs for a service estimate, got {n}')
    totals, attempts = sample_service_times(m, policy, rng, n, max_attempts)
    service = [chunk.mean() for chunk in np.array_split(totals, batches)]
    tries = [chunk.mean() for chunk in np.array_split(attempts.astype(float), batches)]
    return Estimate.from_samples(service), Estimate.from_samples(tries)


def _arrival_times(cfg: SimConfig, rng: RngStream) -> np.ndarray:
    law = cfg.arrival_law
    rate = cfg.queue.arrival_rate if law is None else 1.0 / law.mean
    chunk = int(rate * cfg.horizon * 1.1) + 64
    times = np.empty(0)
    last = 0.0
    while last <= cfg.horizon:
        if law is None:
            gaps = rng.generator.exponential(1.0 / rate, chunk)
        else:
            gaps = np.atleast_1d(law.sample(rng, chunk))
        block = last + np.cumsum(gaps)
        times = np.concatenate((times, block))
        last = block[-1]
    return times[times <= cfg.horizon]


def _departure_times(arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """Lindley recursion d_i = max(a_i, d_{i-1}) + u_i in closed form."""
    work = np.cumsum(services)
    before = work - services
    return work + np.maximum.accumulate(arrivals - before)


def _time_average(arrivals, departures, start, end):
    """Histogram of the number in system over [start, end] and its mean."""
    times = np.concatenate((arrivals, departures))
    steps = np.concatenate((np.ones(arrivals.size, dtype=np.int64), -np.ones(departures.size, dtype=np.int64)))
    order = np.argsort(times, kind='stable')
    times, levels = times[order], np.cumsum(steps[order])
    bounds = np.concatenate(([0.0], times, [max(end, times[-1] if times.size else end)]))
    levels = np.concatenate(([0], levels))
    durations = np.clip(np.minimum(bounds[1:], end) - np.maximum(bounds[:-1], start), 0.0, None)
    histogram = np.bincount(levels, weights=durations) / (end - start)
    return histogram, float(np.dot(np.arange(histogram.size), histogram)), int(levels[np.searchsorted(bounds, end) - 1])


def run_replication(cfg: SimConfig, index: int) -> dict:
    rng = RngStream(cfg.seed, index)
    queue = cfg.queue
    arrivals = _arrival_times(cfg, rng.substream(ARRIVAL_STREAM))
    services, attempts = sample_service_times(
        queue.service, queue.policy, rng.substream(SERVICE_STREAM), arrivals.size, cfg.max_attempts
    )
    departures = _departure_times(arrivals, services)

    start = cfg.warmup_fraction * cfg.horizon
    observed = arrivals >= start
    if not observed.any():
        raise ValidationError(f'No arrivals after warm-up in replication {index}; increase sim.horizon')
    histogram, mean_length, final_level = _time_average(arrivals, departures, start, cfg.horizon)

    return {
        'mean_service': float(services[observed].mean()),
        'mean_sojourn': float((departures - arrivals)[observed].mean()),
        'attempts_per_job': float(attempts[observed].mean()),
        'mean_queue_length': mean_length,
        'histogram': histogram,
        'jobs': int(observed.sum()),
        'final_level': final_level,
    }


def simulate(cfg: SimConfig, mapper: Callable = map) -> SimStats:
    """Run the replications (in any order via mapper) and reduce them in index order."""
    logger.info(f'Simulating {cfg.replications} replications over horizon {cfg.horizon:g}')
    results = list(mapper(lambda i: run_replication(cfg, i), range(cfg.replications)))

    def gather(key):
        return Estimate.from_samples([r[key] for r in results])

    hist_mean, hist_half = histogram_estimate([r['histogram'] for r in results])
    hist_mean = hist_mean / hist_mean.sum()
    length = gather('mean_queue_length')
    growing = any(r['final_level'] > 10.0 * max(1.0, r['mean_queue_length']) for r in results)
    if growing:
        logger.warning('Number in system at the horizon is far above its time average; queue may be unstable')

    return SimStats(
        mean_service=gather('mean_service'),
        mean_queue_length=length,
        mean_sojourn=gather('mean_sojourn'),
        attempts_per_job=gather('attempts_per_job'),
        queue_length_histogram=hist_mean,
        histogram_half_width=hist_half,
        replications=cfg.replications,
        jobs_observed=sum(r['jobs'] for r in results),
        growing_queue=growing,
    )
