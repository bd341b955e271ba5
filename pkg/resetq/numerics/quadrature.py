import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad_vec

from resetq.common.errors import NonConvergentError, NonFiniteError, ValidationError

logger = logging.getLogger(__name__)

TINY = 1e-300
DEFAULT_LIMIT = 2000

Value = Union[float, np.ndarray]


@dataclass
class QuadratureResult:
    value: Value
    abs_error_estimate: float
    evaluations: int

    def to_dict(self):
        value = self.value.tolist() if isinstance(self.value, np.ndarray) else self.value
        return {
            'value': value,
            'abs_error_estimate': self.abs_error_estimate,
            'evaluations': self.evaluations,
        }


def _check_rel_tol(rel_tol: float):
    if not 1e-12 <= rel_tol <= 1e-3:
        raise ValidationError(f'rel_tol must lie in [1e-12, 1e-3], got {rel_tol}')


def _norm(value) -> float:
    return float(np.max(np.abs(value))) if np.ndim(value) else abs(float(value))


def _as_value(res) -> Value:
    res = np.asarray(res, dtype=float)
    return float(res) if res.ndim == 0 else res


def _gauss_kronrod(f, lo, hi, rel_tol, epsabs, points, limit) -> QuadratureResult:
    try:
        res, err, info = quad_vec(
            f, lo, hi,
            epsabs=epsabs,
            epsrel=rel_tol,
            norm='max',
            limit=limit,
            points=points,
            full_output=True,
        )
    except (OverflowError, ZeroDivisionError) as e:
        raise NonFiniteError(f'Integrand overflows on ({lo}, {hi}): {e}') from e
    if info.status == 2 or not np.all(np.isfinite(res)):
        raise NonFiniteError(f'Integrand is not finite on ({lo}, {hi})')
    if info.status == 1:
        raise NonConvergentError(
            f'Quadrature on ({lo}, {hi}) exhausted {limit} subintervals, error estimate {err:.3g}'
        )
    return QuadratureResult(_as_value(res), float(err), int(info.neval))


def _inner_points(points: Optional[Sequence[float]], lo: float, hi: float):
    if not points:
        return None
    inner = sorted({float(p) for p in points if lo < p < hi})
    return inner or None


def integrate(f: Callable[[float], Value], lo: float, hi: float, rel_tol: float = 1e-10,
              points: Optional[Sequence[float]] = None, limit: int = DEFAULT_LIMIT) -> QuadratureResult:
    """Adaptive Gauss-Kronrod on a finite interval; f may be vector valued."""
    _check_rel_tol(rel_tol)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValidationError(f'Invalid integration interval ({lo}, {hi})')
    if hi == lo:
        sample = np.asarray(f(lo), dtype=float)
        return QuadratureResult(_as_value(np.zeros_like(sample)), 0.0, 1)
    return _gauss_kronrod(f, lo, hi, rel_tol, TINY, _inner_points(points, lo, hi), limit)


def integrate_semi_infinite(f: Callable[[float], Value], tail_cutoff: float,
                            rel_tol: float = 1e-10, origin_power: float = 0.0,
                            points: Optional[Sequence[float]] = None,
                            limit: int = DEFAULT_LIMIT) -> QuadratureResult:
    """
    Integrate f over (0, inf): adaptive Gauss-Kronrod on (0, tail_cutoff] plus
    a monitored tail remainder on (tail_cutoff, inf).

    origin_power declares f(t) ~ t**origin_power near 0 (> -1). A negative
    power is removed by the substitution t = u**m with m = 1/(1 + origin_power),
    which turns the integrand into a bounded function of u.
    """
    _check_rel_tol(rel_tol)
    if not (tail_cutoff > 0 and math.isfinite(tail_cutoff)):
        raise ValidationError(f'tail_cutoff must be positive and finite, got {tail_cutoff}')
    if origin_power <= -1.0:
        raise ValidationError(f'Integrand ~ t**{origin_power} is not integrable at 0')

    if origin_power < 0.0:
        m = 1.0 / (1.0 + origin_power)

        def head_integrand(u):
            t = max(u ** m, TINY)
            return m * np.asarray(f(t), dtype=float) * t ** (-origin_power)

        upper = tail_cutoff ** (1.0 / m)
        head_points = [p ** (1.0 / m) for p in points] if points else None
    else:
        head_integrand, upper, head_points = f, tail_cutoff, points

    head = _gauss_kronrod(head_integrand, 0.0, upper, 0.5 * rel_tol, TINY,
                          _inner_points(head_points, 0.0, upper), limit)
    tail_points = _inner_points(points, tail_cutoff, math.inf)
    tail = _gauss_kronrod(f, tail_cutoff, math.inf, rel_tol,
                          max(0.25 * rel_tol * _norm(head.value), TINY), tail_points, limit)

    value = head.value + tail.value
    error = head.abs_error_estimate + tail.abs_error_estimate
    if error > max(rel_tol * _norm(value), TINY):
        raise NonConvergentError(
            f'Semi-infinite quadrature error {error:.3g} exceeds rel_tol {rel_tol:g} of |value|'
        )
    if _norm(tail.value) > 1e3 * rel_tol * max(_norm(value), TINY):
        logger.debug(f'Tail beyond {tail_cutoff:.6g} contributes {_norm(tail.value):.3g}')
    return QuadratureResult(_as_value(value), error, head.evaluations + tail.evaluations)
