import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from resetq.common.errors import NonFiniteError, ValidationError

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo >= 0.0 and self.hi > self.lo and math.isfinite(self.hi)):
            raise ValidationError(f'Invalid bracket [{self.lo}, {self.hi}]')

    @property
    def width(self) -> float:
        return self.hi - self.lo


class Minimum(NamedTuple):
    argmin: float
    value: float
    monotone: bool


def _checked(f, x):
    y = f(x)
    if not (isinstance(y, (int, float, np.floating)) and math.isfinite(y)):
        if y == math.inf:
            return math.inf
        raise NonFiniteError(f'Objective is not finite at {x}: {y}')
    return float(y)


def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Plain golden-section search on [lo, hi], stopping when the bracket is below tol."""
    dist = hi - lo
    if dist <= tol:
        x = 0.5 * (lo + hi)
        return x, _checked(f, x)

    n = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    c = lo + INV_PHI_SQ * dist
    d = lo + INV_PHI * dist
    yc, yd = _checked(f, c), _checked(f, d)

    for _ in range(n - 1):
        if yc < yd:
            hi, d, yd = d, c, yc
            dist *= INV_PHI
            c = lo + INV_PHI_SQ * dist
            yc = _checked(f, c)
        else:
            lo, c, yc = c, d, yd
            dist *= INV_PHI
            d = lo + INV_PHI * dist
            yd = _checked(f, d)

    return (c, yc) if yc < yd else (d, yd)


def minimize_unimodal(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-6,
                      samples: int = 17, mapper: Callable = map) -> Minimum:
    """
    Minimize f on a bracket by golden-section search.

    f is first sampled on an even grid; the best grid point and its two
    neighbours form the golden-section bracket. A minimum on an end of the
    grid is returned as that end with the monotone flag set. The result
    never has a value above both bracket endpoints.
    """
    if tol <= 0.0 or samples < 3:
        raise ValidationError('minimize_unimodal needs tol > 0 and at least 3 samples')

    grid = np.linspace(bracket.lo, bracket.hi, samples)
    values = list(mapper(lambda x: _checked(f, float(x)), grid))
    best = int(np.argmin(values))

    if best == 0 and values[1] >= values[0]:
        logger.info(f'Objective is nondecreasing from {bracket.lo:.6g}; no interior minimum')
        return Minimum(float(grid[0]), values[0], True)
    if best == samples - 1:
        logger.info(f'Objective is nonincreasing up to {bracket.hi:.6g}; no interior minimum')
        return Minimum(float(grid[-1]), values[-1], True)

    lo, hi = float(grid[max(best - 1, 0)]), float(grid[best + 1])
    x, y = golden_section(f, lo, hi, tol * bracket.width)
    if y > values[best]:
        x, y = float(grid[best]), values[best]
    if y > values[0] and y > values[-1]:
        end = 0 if values[0] <= values[-1] else -1
        return Minimum(float(grid[end]), values[end], True)
    return Minimum(x, y, False)


def finite_difference(f: Callable[[float], float], x: float, order: int = 1,
                      step: float = None, side: str = 'central', levels: int = 4) -> float:
    """
    Derivative of f at x by difference quotients and Richardson extrapolation.

    side='central' uses symmetric quotients (error series in h**2);
    side='forward' only evaluates f on [x, x + h], for one-sided limits such
    as a slope at a zero resetting rate (error series in h).
    """
    if order not in (1, 2):
        raise ValidationError(f'finite_difference supports order 1 or 2, got {order}')
    if side not in ('central', 'forward'):
        raise ValidationError(f'Unknown difference side {side!r}')
    h = step if step is not None else 1e-2 * max(abs(x), 1.0)

    def quotient(h):
        if side == 'central':
            if order == 1:
                return (_checked(f, x + h) - _checked(f, x - h)) / (2.0 * h)
            return (_checked(f, x + h) - 2.0 * _checked(f, x) + _checked(f, x - h)) / h ** 2
        if order == 1:
            return (_checked(f, x + h) - _checked(f, x)) / h
        return (_checked(f, x + 2 * h) - 2.0 * _checked(f, x + h) + _checked(f, x)) / h ** 2

    ratio = 4.0 if side == 'central' else 2.0
    table = [quotient(h / 2 ** i) for i in range(levels)]
    for j in range(1, levels):
        factor = ratio ** j
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    result = table[0]
    if not math.isfinite(result):
        raise NonFiniteError(f'Finite difference at {x} is not finite')
    return result
