"""
Pollaczek-Khinchine quantities of the M/G/1 queue with S&X service.

The queue-length PGF G(z) = (1 - rho)(1 - z) U~(lambda(1 - z)) / (U~(lambda(1 - z)) - z)
is expanded as a jet in z at 0; its coefficients are the stationary
probabilities of the number of jobs in the system (queue plus server).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from resetq.analytics.models import POLICY_NONE, POLICY_POISSON, ResetPolicy, ServiceModel, positive_number
from resetq.analytics.service import (
    DEFAULT_REL_TOL,
    MAX_LT_ORDER,
    lt_no_reset,
    lt_poisson,
    mean_under,
)
from resetq.common.errors import SeriesIllConditionedError, UnstableError, ValidationError
from resetq.numerics.jet import Jet

logger = logging.getLogger(__name__)

SERIES_SLACK = 8
CLIP_TOLERANCE = 1e-9
ILL_CONDITIONED = 1e-6
DEFAULT_TAIL_TARGET = 1e-6
INITIAL_TRUNCATION = 32
NO_RESET_MAX_TRUNCATION = 1024


@dataclass(frozen=True)
class QueueSpec:
    arrival_rate: float
    service: ServiceModel
    policy: ResetPolicy = ResetPolicy()

    def __post_init__(self):
        object.__setattr__(self, 'arrival_rate', positive_number(self.arrival_rate, 'arrival rate'))

    def to_dict(self):
        return {
            'arrival_rate': self.arrival_rate,
            'model': self.service.to_dict(),
            'policy': self.policy.to_dict(),
        }


@dataclass
class QueueLengthPMF:
    probs: np.ndarray
    tail_mass: float
    N: int

    @property
    def mean_truncated(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def to_dict(self):
        return {
            'N': self.N,
            'tail_mass': self.tail_mass,
            'probs': self.probs.tolist(),
        }


def utilization(q: QueueSpec, rel_tol: float = DEFAULT_REL_TOL) -> float:
    rho = q.arrival_rate * mean_under(q.service, q.policy, rel_tol)
    if not rho < 1.0:
        raise UnstableError(f'Utilization {rho:.6g} is not below 1')
    return rho


def _require_transform_policy(q: QueueSpec):
    if q.policy.kind not in (POLICY_NONE, POLICY_POISSON):
        raise ValidationError(
            f'Queue-length transforms need policy none or poisson, got {q.policy.kind}; use the simulator'
        )


def service_transform(q: QueueSpec, s: float, order: int, rel_tol: float = DEFAULT_REL_TOL) -> Jet:
    _require_transform_policy(q)
    if q.policy.kind == POLICY_POISSON:
        return lt_poisson(q.service, s, q.policy.rate, order, rel_tol)
    return lt_no_reset(q.service, s, order, rel_tol)


def _max_truncation(q: QueueSpec) -> int:
    if q.policy.kind == POLICY_POISSON:
        return MAX_LT_ORDER - SERIES_SLACK
    return NO_RESET_MAX_TRUNCATION


def _pmf_for(q: QueueSpec, rho: float, n: int, rel_tol: float) -> QueueLengthPMF:
    order = n + SERIES_SLACK
    lam = q.arrival_rate
    # U~(lambda(1 - z)) as a jet in z at 0
    u = service_transform(q, lam, order, rel_tol).rescale(-lam, anchor=0.0)
    z = Jet.variable(0.0, order)
    pgf = (1.0 - rho) * (1.0 - z) * u / (u - z)
    probs = pgf.coeffs[:n + 1].copy()

    worst = float(probs.min())
    if worst < -ILL_CONDITIONED:
        raise SeriesIllConditionedError(
            f'Queue-length probability {worst:.3g} at n={int(probs.argmin())} is negative; truncation {n} too aggressive'
        )
    if worst < -CLIP_TOLERANCE:
        logger.warning(f'Clipping negative queue-length probabilities down to {worst:.3g}')
    probs = np.clip(probs, 0.0, 1.0)
    tail = max(0.0, 1.0 - float(probs.sum()))
    return QueueLengthPMF(probs, tail, n)


def queue_length_pmf(q: QueueSpec, N: Optional[int] = None, tail_target: float = DEFAULT_TAIL_TARGET,
                     rel_tol: float = DEFAULT_REL_TOL) -> QueueLengthPMF:
    """P(L = n), n = 0..N; with N=None the truncation doubles until the tail mass is below tail_target."""
    _require_transform_policy(q)
    rho = utilization(q, rel_tol)
    cap = _max_truncation(q)

    if N is not None:
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 0:
            raise ValidationError(f'Truncation must be a non-negative integer, got {N!r}')
        if N > cap:
            raise ValidationError(f'Truncation {N} exceeds the maximum {cap} for policy {q.policy.kind}')
        return _pmf_for(q, rho, int(N), rel_tol)

    n = INITIAL_TRUNCATION
    while True:
        pmf = _pmf_for(q, rho, n, rel_tol)
        if pmf.tail_mass < tail_target:
            logger.info(f'Queue-length pmf truncated at N={n}, tail mass {pmf.tail_mass:.3g}')
            return pmf
        if n >= cap:
            logger.warning(f'Truncation cap {cap} reached with tail mass {pmf.tail_mass:.3g}')
            return pmf
        n = min(2 * n, cap)


def service_moments(q: QueueSpec, rel_tol: float = DEFAULT_REL_TOL):
    """(E[U], E[U^2]) from the service transform jet at s = 0."""
    jet = service_transform(q, 0.0, 2, rel_tol)
    return -jet.coeffs[1], 2.0 * jet.coeffs[2]


def _closed_form_moments(m: ServiceModel):
    S, X = m.slowdown, m.jobsize
    if m.is_additive:
        return S.mean + X.mean, S.moment(2) + 2.0 * S.mean * X.mean + X.moment(2)
    return S.mean * X.mean, S.moment(2) * X.moment(2)


def mean_queue_length(q: QueueSpec, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """rho/(1 - rho) + rho^2 (CV_U^2 - 1) / (2 (1 - rho))."""
    _require_transform_policy(q)
    if q.policy.kind == POLICY_NONE:
        m1, m2 = _closed_form_moments(q.service)
    else:
        m1, m2 = service_moments(q, rel_tol)
    rho = q.arrival_rate * m1
    if not rho < 1.0:
        raise UnstableError(f'Utilization {rho:.6g} is not below 1')
    cv2 = m2 / m1 ** 2 - 1.0
    return rho / (1.0 - rho) + rho ** 2 * (cv2 - 1.0) / (2.0 * (1.0 - rho))


def sojourn_lst(q: QueueSpec, s: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """W~(s) = U~(s)(1 - rho)s / (s - lambda(1 - U~(s)))."""
    s = positive_number(s, 'transform argument')
    rho = utilization(q, rel_tol)
    u = service_transform(q, s, 0, rel_tol).value
    return u * (1.0 - rho) * s / (s - q.arrival_rate * (1.0 - u))


def mean_sojourn(q: QueueSpec, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """-dW~/ds at 0, from the order-2 service jet with the removable singularity divided out."""
    _require_transform_policy(q)
    u = service_transform(q, 0.0, 2, rel_tol)
    lam = q.arrival_rate
    rho = lam * -u.coeffs[1]
    if not rho < 1.0:
        raise UnstableError(f'Utilization {rho:.6g} is not below 1')
    deficit = Jet(np.concatenate(([0.0], -u.coeffs[1:])), anchor=0.0)
    w = u * (1.0 - rho) / (1.0 - lam * deficit.shift_down())
    return -float(w.coeffs[1])


def littles_law_gap(q: QueueSpec, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Relative mismatch between mean_queue_length and lambda * mean_sojourn."""
    length = mean_queue_length(q, rel_tol)
    return abs(length - q.arrival_rate * mean_sojourn(q, rel_tol)) / max(abs(length), math.ulp(1.0))
