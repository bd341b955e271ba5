import logging
import math
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from resetq.common.errors import ValidationError

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95
CHI_SQUARE_LEVEL = 1e-3
CHI_SQUARE_MIN_PROB = 1e-2


def _t_quantile(n: int, level: float = CONFIDENCE) -> float:
    return float(sps.t.ppf(0.5 + 0.5 * level, n - 1))


@dataclass
class Estimate:
    """Point estimate with a two-sided Student-t confidence half-width."""
    mean: float
    half_width: float
    n: int

    @classmethod
    def from_samples(cls, values: Sequence[float], level: float = CONFIDENCE) -> 'Estimate':
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(values.mean())
        if n < 2:
            return cls(mean, math.inf, n)
        return cls(mean, _t_quantile(n, level) * float(values.std(ddof=1)) / math.sqrt(n), n)

    @property
    def standard_error(self) -> float:
        if self.n < 2 or not math.isfinite(self.half_width):
            return math.inf
        return self.half_width / _t_quantile(self.n)

    def covers(self, value: float) -> bool:
        return abs(self.mean - value) <= self.half_width

    def z_score(self, value: float) -> float:
        se = self.standard_error
        diff = self.mean - value
        if se == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / se

    def to_dict(self):
        return {'mean': self.mean, 'half_width': self.half_width, 'n': self.n}


def histogram_estimate(histograms: Sequence[np.ndarray], level: float = CONFIDENCE):
    """Per-level mean and half-width of time-averaged queue-length histograms across replications."""
    width = max(h.size for h in histograms)
    table = np.zeros((len(histograms), width))
    for i, h in enumerate(histograms):
        table[i, :h.size] = h
    mean = table.mean(axis=0)
    if len(histograms) < 2:
        return mean, np.full(width, math.inf)
    half = _t_quantile(len(histograms), level) * table.std(axis=0, ddof=1) / math.sqrt(len(histograms))
    return mean, half


@dataclass
class SimStats:
    mean_service: Estimate
    mean_queue_length: Estimate
    mean_sojourn: Estimate
    attempts_per_job: Estimate
    queue_length_histogram: np.ndarray
    histogram_half_width: np.ndarray
    replications: int
    jobs_observed: int
    growing_queue: bool = False

    def to_dict(self):
        return {
            'mean_service': self.mean_service.to_dict(),
            'mean_queue_length': self.mean_queue_length.to_dict(),
            'mean_sojourn': self.mean_sojourn.to_dict(),
            'attempts_per_job': self.attempts_per_job.to_dict(),
            'queue_length_histogram': self.queue_length_histogram.tolist(),
            'histogram_half_width': self.histogram_half_width.tolist(),
            'replications': self.replications,
            'jobs_observed': self.jobs_observed,
            'growing_queue': self.growing_queue,
        }


@dataclass
class ComparisonRow:
    quantity: str
    analytic: float
    simulated: float
    half_width: float
    z_score: float
    passed: bool

    def to_dict(self):
        return {
            'quantity': self.quantity,
            'analytic': self.analytic,
            'simulated': self.simulated,
            'half_width': self.half_width,
            'z_score': self.z_score,
            'passed': self.passed,
        }


@dataclass
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    level: float = CHI_SQUARE_LEVEL

    @property
    def passed(self) -> bool:
        return self.p_value >= self.level

    def to_dict(self):
        return {
            'statistic': self.statistic,
            'dof': self.dof,
            'p_value': self.p_value,
            'level': self.level,
            'passed': self.passed,
        }


def pmf_chi_square(sim: SimStats, probs: Sequence[float], min_prob: float = CHI_SQUARE_MIN_PROB,
                   level: float = CHI_SQUARE_LEVEL) -> ChiSquareResult:
    """
    Chi-square test of the simulated queue-length histogram against probs.

    Every level with probability at least min_prob contributes its
    replication t-statistic, mapped onto the normal scale; the sum of squares
    is referred to a chi-square law with one degree of freedom per level.
    """
    if sim.replications < 2:
        raise ValidationError('A chi-square test needs at least two replications')
    probs = np.asarray(probs, dtype=float)
    histogram, half_width = sim.queue_length_histogram, sim.histogram_half_width
    t_quantile = _t_quantile(sim.replications)

    z = []
    for n, p in enumerate(probs):
        if p < min_prob:
            continue
        observed = float(histogram[n]) if n < histogram.size else 0.0
        se = float(half_width[n]) / t_quantile if n < half_width.size else 0.0
        diff = abs(observed - p)
        if se == 0.0:
            t_stat = 0.0 if diff == 0.0 else math.inf
        else:
            t_stat = diff / se
        z.append(float(sps.norm.isf(sps.t.sf(t_stat, sim.replications - 1))))
    if not z:
        raise ValidationError(f'No queue-length level has probability of at least {min_prob:g}')

    statistic = float(np.sum(np.square(z)))
    return ChiSquareResult(statistic, len(z), float(sps.chi2.sf(statistic, len(z))), level)


@dataclass
class ComparisonReport:
    rows: List[ComparisonRow] = field(default_factory=list)
    chi_square: Optional[ChiSquareResult] = None

    @property
    def all_passed(self) -> bool:
        rows_passed = all(row.passed for row in self.rows)
        return rows_passed and (self.chi_square is None or self.chi_square.passed)

    def to_dict(self):
        rv = {'all_passed': self.all_passed, 'rows': [row.to_dict() for row in self.rows]}
        if self.chi_square is not None:
            rv['pmf_chi_square'] = self.chi_square.to_dict()
        return rv


SCALAR_QUANTITIES = ('mean_service', 'mean_queue_length', 'mean_sojourn', 'attempts_per_job')


def _row(name: str, estimate: Estimate, analytic: float) -> ComparisonRow:
    return ComparisonRow(name, float(analytic), estimate.mean, estimate.half_width,
                         estimate.z_score(analytic), estimate.covers(analytic))


def compare(sim: SimStats, analytic: Mapping[str, object]) -> ComparisonReport:
    """
    Check analytic values against simulation confidence intervals.

    Keys are SimStats quantity names; 'queue_length_pmf' takes an array and
    is compared level by level with the time-averaged histogram.
    """
    report = ComparisonReport()
    for name, value in analytic.items():
        if name in SCALAR_QUANTITIES:
            report.rows.append(_row(name, getattr(sim, name), value))
        elif name == 'queue_length_pmf':
            probs = np.asarray(value, dtype=float)
            for n, p in enumerate(probs):
                if n < sim.queue_length_histogram.size:
                    est = Estimate(float(sim.queue_length_histogram[n]), float(sim.histogram_half_width[n]),
                                   sim.replications)
                else:
                    est = Estimate(0.0, 0.0, sim.replications)
                report.rows.append(_row(f'P_L({n})', est, p))
            if sim.replications >= 2 and np.any(probs >= CHI_SQUARE_MIN_PROB):
                report.chi_square = pmf_chi_square(sim, probs)
        else:
            logger.warning(f'No simulated counterpart for {name!r}; skipped')

    failed = [row.quantity for row in report.rows if not row.passed]
    if failed:
        logger.info(f'Simulation disagrees with analytic values for {failed}')
    return report
