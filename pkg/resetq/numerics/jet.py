"""
Truncated Taylor series ("jets") of scalar functions.

A jet of order K anchored at a stores the Taylor coefficients
c_k = f^{(k)}(a) / k!, k = 0..K. Arithmetic is exact for truncated power
series; storing coefficients (not derivatives) keeps K in the hundreds free
of factorial overflow.
"""

import math
from typing import Callable

import numpy as np

from resetq.common.errors import ZeroConstantTermDivisionError, ValidationError


class Jet:
    __slots__ = ('anchor', 'coeffs')

    def __init__(self, coeffs, anchor: float = 0.0):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValidationError('Jet needs a non-empty 1-d coefficient array')
        self.coeffs = coeffs
        self.anchor = float(anchor)

    @classmethod
    def constant(cls, value: float, order: int, anchor: float = 0.0) -> 'Jet':
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(coeffs, anchor)

    @classmethod
    def variable(cls, anchor: float, order: int) -> 'Jet':
        """The identity function s -> s expanded at `anchor`."""
        coeffs = np.zeros(order + 1)
        coeffs[0] = anchor
        if order >= 1:
            coeffs[1] = 1.0
        return cls(coeffs, anchor)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def __repr__(self):
        return f'Jet(anchor={self.anchor!r}, coeffs={self.coeffs.tolist()!r})'

    def derivative(self, k: int) -> float:
        return float(self.coeffs[k]) * math.factorial(k)

    def truncate(self, order: int) -> 'Jet':
        return Jet(self.coeffs[:order + 1].copy(), self.anchor)

    def rescale(self, factor: float, anchor: float = None) -> 'Jet':
        """Compose with an affine map: returns the jet of v -> f(a + factor*(v - b)) at b."""
        powers = factor ** np.arange(self.coeffs.size)
        return Jet(self.coeffs * powers, self.anchor if anchor is None else anchor)

    def shift_down(self, atol: float = 1e-9) -> 'Jet':
        """Divide by (s - anchor); requires a vanishing constant term and drops one order."""
        if abs(self.coeffs[0]) > atol:
            raise ZeroConstantTermDivisionError(
                f'Cannot divide by (s - {self.anchor}): constant term is {self.coeffs[0]}'
            )
        if self.order == 0:
            raise ValidationError('Cannot shift a jet of order 0')
        return Jet(self.coeffs[1:].copy(), self.anchor)

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), self.order, self.anchor)

    def _align(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        return self.coeffs[:order + 1], other.coeffs[:order + 1]

    def __add__(self, other):
        a, b = self._align(other)
        return Jet(a + b, self.anchor)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return Jet(a - b, self.anchor)

    def __rsub__(self, other):
        a, b = self._align(other)
        return Jet(b - a, self.anchor)

    def __neg__(self):
        return Jet(-self.coeffs, self.anchor)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * float(other), self.anchor)
        a, b = self._align(other)
        return Jet(np.convolve(a, b)[:a.size], self.anchor)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = float(other)
            if other == 0.0:
                raise ZeroConstantTermDivisionError('Division of a jet by zero')
            return Jet(self.coeffs / other, self.anchor)
        a, b = self._align(other)
        return Jet(_series_divide(a, b), self.anchor)

    def __rtruediv__(self, other):
        a, b = self._align(other)
        return Jet(_series_divide(b, a), self.anchor)

    def __pow__(self, exponent):
        return jpow(self, exponent)


def _series_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    b0 = den[0]
    if b0 == 0.0 or not np.isfinite(b0):
        raise ZeroConstantTermDivisionError(f'Series division with constant term {b0}')
    out = np.empty_like(num)
    out[0] = num[0] / b0
    for n in range(1, num.size):
        out[n] = (num[n] - np.dot(den[1:n + 1], out[n - 1::-1])) / b0
    return out


def jexp(a: Jet) -> Jet:
    g = a.coeffs
    out = np.empty_like(g)
    out[0] = math.exp(g[0])
    k = np.arange(1, g.size, dtype=float)
    for n in range(1, g.size):
        out[n] = np.dot(k[:n] * g[1:n + 1], out[n - 1::-1]) / n
    return Jet(out, a.anchor)


def jlog(a: Jet) -> Jet:
    f = a.coeffs
    if f[0] <= 0.0:
        raise ZeroConstantTermDivisionError(f'Logarithm of a jet with constant term {f[0]}')
    out = np.empty_like(f)
    out[0] = math.log(f[0])
    for n in range(1, f.size):
        k = np.arange(1, n, dtype=float)
        acc = np.dot(k * out[1:n], f[n - 1:0:-1]) if n > 1 else 0.0
        out[n] = (f[n] - acc / n) / f[0]
    return Jet(out, a.anchor)


def jpow(a: Jet, exponent: float) -> Jet:
    """a**p for real p, by the J.C.P. Miller recurrence."""
    p = float(exponent)
    f = a.coeffs
    if f[0] == 0.0:
        if p == int(p) and p >= 0:
            result = Jet.constant(1.0, a.order, a.anchor)
            for _ in range(int(p)):
                result = result * a
            return result
        raise ZeroConstantTermDivisionError('Non-integer power of a jet with zero constant term')
    out = np.zeros_like(f)
    out[0] = f[0] ** p
    for n in range(1, f.size):
        k = np.arange(1, n + 1, dtype=float)
        out[n] = np.dot((p * k - (n - k)) * f[1:n + 1], out[n - 1::-1]) / (n * f[0])
    return Jet(out, a.anchor)


def jsqrt(a: Jet) -> Jet:
    return jpow(a, 0.5)


def jet_combine(expression: Callable[..., Jet], *operands: Jet) -> Jet:
    """
    Evaluate an arithmetic expression over jets.

    Operands are truncated to their common order and must share an anchor;
    the expression is any callable built from jet arithmetic (+, -, *, /),
    jexp/jlog/jpow and Jet.rescale.
    """
    if not operands:
        raise ValidationError('jet_combine needs at least one operand')
    order = min(op.order for op in operands)
    anchors = {op.anchor for op in operands}
    if len(anchors) > 1:
        raise ValidationError(f'Jets anchored at different points: {sorted(anchors)}')
    result = expression(*(op.truncate(order) for op in operands))
    if not isinstance(result, Jet):
        result = Jet.constant(float(result), order, operands[0].anchor)
    return result
