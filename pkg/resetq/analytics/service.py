"""
Service time of S&X jobs with and without resetting.

Outer integrals over the job size X go through DistributionSpec.expect,
which collapses to a point evaluation for a deterministic X. Differences
of transforms (1 - S~, X~(-r) - S~(r)) are formed from transform
deficits so that small rates do not cancel.
"""

import logging
import math

import numpy as np

from resetq.analytics.models import (
    POLICY_NONE,
    POLICY_POISSON,
    POLICY_RENEWAL,
    POLICY_SHARP,
    ResetPolicy,
    ServiceModel,
    positive_number,
)
from resetq.common.errors import NonCompletingError, NonFiniteError, ValidationError
from resetq.distributions import Deterministic, DistributionSpec
from resetq.numerics.jet import Jet, jexp

logger = logging.getLogger(__name__)

MAX_LT_ORDER = 128
PROBABILITY_FLOOR = 1e-300
DEFAULT_REL_TOL = 1e-10


def _transform_and_deficit(d: DistributionSpec, s: float):
    """(E[e^{-sT}], 1 - E[e^{-sT}]), each accurate in its own right."""
    deficit = d.laplace_deficit(s)
    value = 1.0 - deficit if deficit < 0.5 else d.laplace(s, 0).value
    return value, deficit


def mean_no_reset(m: ServiceModel) -> float:
    if m.is_additive:
        return m.slowdown.mean + m.jobsize.mean
    return m.slowdown.mean * m.jobsize.mean


def mean_poisson(m: ServiceModel, r: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Mean service time when attempts are cut by exponential timers of rate r."""
    r = positive_number(r, 'rate')
    S, X = m.slowdown, m.jobsize

    if m.is_additive:
        # E[e^{rX}] must be finite
        X.check_argument(-r, 0)
        s_value, s_deficit = _transform_and_deficit(S, r)
        x_deficit = X.laplace_deficit(-r)
        if s_value <= 0.0:
            raise NonFiniteError(f'S~({r:g}) underflows; mean service time is not representable')
        return (s_deficit - x_deficit) / (r * s_value)

    def conditional(x):
        if x == 0.0:
            return 0.0
        value, deficit = _transform_and_deficit(S, r * x)
        if value <= 0.0:
            raise NonFiniteError(f'S~({r * x:g}) underflows at job size {x:g}')
        return deficit / (r * value)

    return float(X.expect(conditional, rel_tol=rel_tol))


def lt_no_reset(m: ServiceModel, s: float, order: int = 0, rel_tol: float = DEFAULT_REL_TOL) -> Jet:
    """Jet in s of the reset-free service-time transform."""
    S, X = m.slowdown, m.jobsize
    if m.is_additive:
        return X.laplace(s, order) * S.laplace(s, order)

    def coefficients(x):
        return S.laplace(s * x, order).rescale(x, anchor=s).coeffs

    return Jet(X.expect(coefficients, rel_tol=rel_tol), anchor=s)


def lt_poisson(m: ServiceModel, s: float, r: float, order: int = 0, rel_tol: float = DEFAULT_REL_TOL) -> Jet:
    """Jet in s of the service-time transform under Poissonian resetting at rate r."""
    r = positive_number(r, 'rate')
    if not (s >= 0.0 and math.isfinite(s)):
        raise ValidationError(f'Transform argument must be non-negative, got {s}')
    if not 0 <= order <= MAX_LT_ORDER:
        raise ValidationError(f'lt_poisson order must lie in [0, {MAX_LT_ORDER}], got {order}')

    S, X = m.slowdown, m.jobsize
    variable = Jet.variable(s, order)
    shifted = variable + r

    def resetting_transform(attempt: Jet) -> Jet:
        return shifted * attempt / (variable + r * attempt)

    if m.is_additive:
        slowdown_lt = S.laplace(s + r, order).rescale(1.0, anchor=s)

        def coefficients(x):
            attempt = jexp(shifted * (-x)) * slowdown_lt
            return resetting_transform(attempt).coeffs
    else:
        def coefficients(x):
            attempt = S.laplace((s + r) * x, order).rescale(x, anchor=s)
            return resetting_transform(attempt).coeffs

    return Jet(X.expect(coefficients, rel_tol=rel_tol), anchor=s)


def moments_poisson(m: ServiceModel, r: float, n: int = 2, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """E[U_r^k] for k = 1..n, read off the transform jet at s = 0."""
    jet = lt_poisson(m, 0.0, r, n, rel_tol=rel_tol)
    k = np.arange(1, n + 1)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    return signs * jet.coeffs[1:] * np.array([math.factorial(int(i)) for i in k], dtype=float)


def _sharp_preflight(m: ServiceModel, tau: float):
    S, X = m.slowdown, m.jobsize
    if m.is_additive:
        if X.support_upper + S.support_lower >= tau:
            raise NonCompletingError(
                f'Additive requirement x + S is never below period {tau:g} for all job sizes'
            )
    elif S.support_lower > 0.0 and X.support_upper * S.support_lower >= tau:
        raise NonCompletingError(
            f'Multiplicative requirement x * S is never below period {tau:g} for all job sizes'
        )


def _success_probability(p: float, what: str) -> float:
    if p < PROBABILITY_FLOOR:
        raise NonCompletingError(f'Attempts never complete: success probability {p:.3g} {what}')
    return p


def mean_sharp(m: ServiceModel, tau: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Mean service time when every attempt is cut after the fixed period tau."""
    tau = positive_number(tau, 'period')
    _sharp_preflight(m, tau)
    S = m.slowdown

    def conditional(x):
        if m.is_additive:
            c = tau - x
            p = _success_probability(S.prob_below(c), f'at job size {x:g}')
            return x + S.partial_expectation(c, rel_tol) / p + tau * (1.0 - p) / p
        if x == 0.0:
            return 0.0
        c = tau / x
        p = _success_probability(S.prob_below(c), f'at job size {x:g}')
        return (x * S.partial_expectation(c, rel_tol) + tau * (1.0 - p)) / p

    return float(m.jobsize.expect(conditional, rel_tol=rel_tol))


def mean_generic_reset(m: ServiceModel, R: DistributionSpec, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    Mean service time when each attempt is cut at an independent draw of R.

    For a job of size x with per-attempt success probability p = Pr(req < R):
    E[U(x)] = E[req | success] + (1 - p)/p * E[R | failure] (+ x in the
    additive model, where req excludes x).
    """
    if not isinstance(R, DistributionSpec):
        raise ValidationError('Resetting time must be a distribution')
    if isinstance(R, Deterministic):
        return mean_sharp(m, R.value, rel_tol)

    S = m.slowdown
    sf = R.law.sf

    def conditional(x):
        if not m.is_additive and x == 0.0:
            return 0.0

        def success_terms(s):
            survive = sf(m.requirement(x, s))
            return np.array([survive, s * survive])

        p, slowdown_on_success = S.expect(success_terms, rel_tol=rel_tol)
        p = _success_probability(float(p), f'at job size {x:g}')

        if m.is_additive:
            def not_done_by(t):
                return 1.0 - S.prob_below(t - x)
            kinks = [x + S.support_lower]
        else:
            def not_done_by(t):
                return 1.0 - S.prob_below(t / x)
            kinks = [x * S.support_lower] if S.support_lower > 0.0 else None

        wasted = R.expect(lambda t: t * not_done_by(t), rel_tol=rel_tol, points=kinks)
        base = x if m.is_additive else 0.0
        scale = 1.0 if m.is_additive else x
        return base + scale * slowdown_on_success / p + wasted / p

    return float(m.jobsize.expect(conditional, rel_tol=rel_tol))


def completion_probability(m: ServiceModel, policy: ResetPolicy, x: float) -> float:
    """Probability that a single attempt on a job of size x finishes before the reset."""
    x = float(x)
    S = m.slowdown
    if policy.kind == POLICY_NONE:
        return 1.0
    if policy.kind == POLICY_POISSON:
        if m.is_additive:
            return math.exp(-policy.rate * x) * S.laplace(policy.rate, 0).value
        return S.laplace(policy.rate * x, 0).value
    if policy.kind == POLICY_SHARP:
        c = policy.period - x if m.is_additive else (policy.period / x if x > 0.0 else math.inf)
        return S.prob_below(c)
    R = policy.law
    if isinstance(R, Deterministic):
        return completion_probability(m, ResetPolicy.sharp(R.value), x)
    sf = R.law.sf
    return float(S.expect(lambda s: sf(m.requirement(x, s))))


def mean_under(m: ServiceModel, policy: ResetPolicy, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Mean service time for any policy kind."""
    if policy.kind == POLICY_NONE:
        return mean_no_reset(m)
    if policy.kind == POLICY_POISSON:
        return mean_poisson(m, policy.rate, rel_tol)
    if policy.kind == POLICY_SHARP:
        return mean_sharp(m, policy.period, rel_tol)
    if policy.kind == POLICY_RENEWAL:
        return mean_generic_reset(m, policy.law, rel_tol)
    raise ValidationError(f'Unknown policy kind {policy.kind!r}')
