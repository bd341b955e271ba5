import logging
import math

from resetq.analytics.models import BenefitReport, ServiceModel
from resetq.analytics.service import mean_no_reset

logger = logging.getLogger(__name__)


def benefit_diagnosis(m: ServiceModel) -> BenefitReport:
    """
    Sign of d E[U_r] / dr at r = 0.

    Multiplicative: slope E[X^2](E[S]^2 - E[S^2]/2), beneficial iff CV_S > 1.
    Additive: slope E[X]E[S] + E[S]^2 + (E[X^2] - E[S^2])/2, beneficial iff
    var(S) - var(X) > (E[X] + E[S])^2.
    """
    S, X = m.slowdown, m.jobsize
    es, es2 = S.moment(1), S.moment(2)
    ex, ex2 = X.moment(1), X.moment(2)
    cv = S.cv
    reduced = None

    if m.is_additive:
        slope = ex * es + es ** 2 + 0.5 * (ex2 - es2)
        lhs = S.variance - X.variance
        rhs = (ex + es) ** 2
        if X.is_atom and es > 0.0:
            reduced = 1.0 + ex / es
    else:
        slope = ex2 * (es ** 2 - 0.5 * es2)
        lhs = cv
        # resetting has no effect on zero-size jobs
        rhs = 1.0 if ex2 > 0.0 else math.inf

    report = BenefitReport(
        combiner=m.combiner,
        mean_no_reset=mean_no_reset(m),
        slope_at_zero=slope,
        beneficial=slope < 0.0,
        condition_lhs=lhs,
        condition_rhs=rhs,
        cv_slowdown=cv,
        reduced_threshold=reduced,
    )
    logger.debug(f'Benefit diagnosis: slope {slope:.6g}, beneficial={report.beneficial}')
    return report
