import logging
import math
from typing import Callable, Optional

from resetq.analytics.benefit import benefit_diagnosis
from resetq.analytics.models import OptimumReport, ServiceModel
from resetq.analytics.service import DEFAULT_REL_TOL, mean_poisson, mean_sharp
from resetq.common.errors import NonCompletingError
from resetq.numerics.optimize import Bracket, minimize_unimodal

logger = logging.getLogger(__name__)

MAX_DOUBLINGS = 60
REGULARITY_MARGIN = 0.999
LOW_QUANTILE = 1e-6
HIGH_QUANTILE = 1.0 - 1e-9
NOT_BENEFICIAL = 'resetting does not lower the mean service time of this model'


def poisson_bracket(m: ServiceModel, mean0: float, rel_tol: float = DEFAULT_REL_TOL) -> Bracket:
    """[eps, r_hi], with r_hi doubled from 1/E[U] until the mean is back above mean0."""
    cap = math.inf
    if m.is_additive:
        cap = REGULARITY_MARGIN * m.jobsize.regularity_bound

    r_hi = min(1.0 / mean0, cap)
    for _ in range(MAX_DOUBLINGS):
        if mean_poisson(m, r_hi, rel_tol) >= mean0:
            break
        if 2.0 * r_hi >= cap:
            logger.info(f'Rate bracket stopped at the regularity bound {cap:.6g}')
            r_hi = cap
            break
        r_hi *= 2.0
    logger.info(f'Poisson rate bracket: [{r_hi * 1e-6:.6g}, {r_hi:.6g}]')
    return Bracket(r_hi * 1e-6, r_hi)


def optimal_poisson_rate(m: ServiceModel, bracket_hint: Optional[Bracket] = None, tol: float = 1e-6,
                         mapper: Callable = map, rel_tol: float = DEFAULT_REL_TOL) -> OptimumReport:
    report = benefit_diagnosis(m)
    mean0 = report.mean_no_reset
    if not report.beneficial:
        logger.info('Model does not benefit from resetting; optimal rate is 0')
        return OptimumReport('rate', 0.0, mean0, mean0, True, NOT_BENEFICIAL)

    bracket = bracket_hint or poisson_bracket(m, mean0, rel_tol)
    best = minimize_unimodal(lambda r: mean_poisson(m, r, rel_tol), bracket, tol, mapper=mapper)
    if best.monotone and best.value >= mean0:
        return OptimumReport('rate', 0.0, mean0, mean0, True, 'no rate in the bracket improves on no resetting')
    logger.info(f'Optimal Poisson rate {best.argmin:.6g} with mean {best.value:.6g} (no reset {mean0:.6g})')
    return OptimumReport('rate', best.argmin, best.value, mean0, best.monotone)


def sharp_bracket(m: ServiceModel) -> Bracket:
    """Period range from a low to a high quantile of the requirement of the largest relevant job."""
    S, X = m.slowdown, m.jobsize
    x_ref = X.support_upper if math.isfinite(X.support_upper) else X.mean
    s_lo = max(S.ppf(LOW_QUANTILE), 1e-9 * S.mean)
    s_hi = S.ppf(HIGH_QUANTILE)
    if m.is_additive:
        if not math.isfinite(X.support_upper):
            raise NonCompletingError('Sharp resetting never completes an unbounded additive job size')
        return Bracket(x_ref + s_lo, x_ref + s_hi)
    return Bracket(x_ref * s_lo, x_ref * s_hi)


def optimal_sharp_period(m: ServiceModel, bracket_hint: Optional[Bracket] = None, tol: float = 1e-6,
                         mapper: Callable = map, rel_tol: float = DEFAULT_REL_TOL) -> OptimumReport:
    """Period minimizing mean_sharp, searched on a logarithmic scale."""
    report = benefit_diagnosis(m)
    mean0 = report.mean_no_reset
    if not report.beneficial:
        logger.info('Model does not benefit from resetting; optimal period is infinite')
        return OptimumReport('period', math.inf, mean0, mean0, True, NOT_BENEFICIAL)

    bracket = bracket_hint or sharp_bracket(m)
    tau_lo = bracket.lo
    log_span = Bracket(0.0, math.log(bracket.hi / tau_lo))
    best = minimize_unimodal(lambda v: mean_sharp(m, tau_lo * math.exp(v), rel_tol), log_span, tol,
                             mapper=mapper)
    tau = tau_lo * math.exp(best.argmin)

    if best.monotone and best.argmin == log_span.hi:
        logger.info('Mean decreases up to the largest period; treating the optimum as no resetting')
        return OptimumReport('period', math.inf, mean0, mean0, True, 'mean decreases towards no resetting')
    logger.info(f'Optimal sharp period {tau:.6g} with mean {best.value:.6g} (no reset {mean0:.6g})')
    return OptimumReport('period', tau, best.value, mean0, best.monotone)
