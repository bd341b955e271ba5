"""
Parametric laws for the slowdown S, the job size X and resetting times R.

Every family is a frozen dataclass whose fields are exactly the JSON
fields of its encoding, e.g. {"kind": "gamma", "shape": 0.01, "scale": 50.0}.
Continuous families delegate distribution functions to scipy.stats;
transforms and moments are closed form except the LogNormal transform,
which is evaluated by saddle-point-centred Gauss-Hermite quadrature.
"""

import logging
import math
from dataclasses import dataclass, fields
from functools import cached_property, lru_cache
from typing import Callable, ClassVar, Dict, Optional, Sequence, Tuple, Type

import numpy as np
from scipy import special, stats

from resetq.common.errors import (
    AtomDensityError,
    DivergentTransformError,
    NonConvergentError,
    NonFiniteError,
    ValidationError,
)
from resetq.distributions.rng import RngStream
from resetq.numerics.jet import Jet, jexp, jsqrt
from resetq.numerics.quadrature import integrate, integrate_semi_infinite

logger = logging.getLogger(__name__)

TAIL_PROBABILITY = 1e-10
GH_START_NODES = 200
GH_MAX_NODES = 3200
GH_REL_TOL = 1e-8
SQRT2 = math.sqrt(2.0)

_REGISTRY: Dict[str, Type['DistributionSpec']] = {}


def register(cls):
    _REGISTRY[cls.kind] = cls
    return cls


def _check_time(t: float) -> float:
    if isinstance(t, bool) or not isinstance(t, (int, float, np.floating, np.integer)):
        raise ValidationError(f'Time must be a real number, got {t!r}')
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError(f'Time must be finite, got {t}')
    if t < 0.0:
        raise ValidationError(f'Time must be non-negative, got {t}')
    return t


def _check_order(order: int) -> int:
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)) or order < 0:
        raise ValidationError(f'Jet order must be a non-negative integer, got {order!r}')
    return int(order)


def _alternating(order: int) -> np.ndarray:
    return np.where(np.arange(order + 1) % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class DistributionSpec:
    """
    Base of the tagged union of laws; subclasses register under `kind`.

    Each family exposes `mean` (a field for InverseGaussian, a property
    elsewhere), `_moment`, `law` and the transform hooks.
    """

    kind: ClassVar[str] = ''
    is_atom: ClassVar[bool] = False
    # sup of b with E[e^{bT}] finite, and whether the supremum itself is allowed
    regularity_bound: ClassVar[float] = math.inf
    regularity_inclusive: ClassVar[bool] = False

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ValidationError(f'{self.kind}.{f.name} must be a number, got {value!r}')
            if not math.isfinite(float(value)):
                raise ValidationError(f'{self.kind}.{f.name} must be finite, got {value!r}')
            object.__setattr__(self, f.name, float(value))
        self.validate()

    def validate(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0.0:
                raise ValidationError(f'{self.kind}.{f.name} must be positive, got {getattr(self, f.name)}')

    def to_dict(self):
        rv = {'kind': self.kind}
        rv.update({f.name: getattr(self, f.name) for f in fields(self)})
        return rv

    @staticmethod
    def from_dict(data) -> 'DistributionSpec':
        if not isinstance(data, dict):
            raise ValidationError(f'Distribution must be an object, got {type(data).__name__}')
        kind = data.get('kind')
        cls = _REGISTRY.get(kind)
        if cls is None:
            raise ValidationError(f'Unknown distribution kind {kind!r}; expected one of {sorted(_REGISTRY)}')
        names = [f.name for f in fields(cls)]
        unknown = sorted(set(data) - set(names) - {'kind'})
        if unknown:
            raise ValidationError(f'Unknown fields for {kind}: {unknown}')
        missing = [name for name in names if name not in data]
        if missing:
            raise ValidationError(f'Missing fields for {kind}: {missing}')
        return cls(**{name: data[name] for name in names})

    # moments

    def moment(self, k: int) -> float:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
            raise ValidationError(f'Moment order must be a non-negative integer, got {k!r}')
        if k == 0:
            return 1.0
        return float(self._moment(int(k)))

    def _moment(self, k: int) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        return max(self.moment(2) - self.mean ** 2, 0.0)

    @property
    def cv(self) -> float:
        """Coefficient of variation; 0 for a law concentrated at 0."""
        if self.mean == 0.0:
            return 0.0
        return math.sqrt(self.variance) / self.mean

    # distribution functions

    @cached_property
    def law(self):
        """The equivalent frozen scipy.stats distribution."""
        raise NotImplementedError

    @property
    def support_lower(self) -> float:
        return 0.0

    @property
    def support_upper(self) -> float:
        return math.inf

    @property
    def origin_power(self) -> float:
        """Exponent a of the density's behaviour t**a at 0 (0 when bounded)."""
        return 0.0

    def pdf(self, t: float) -> float:
        return float(self.law.pdf(_check_time(t)))

    def cdf(self, t: float) -> float:
        return float(self.law.cdf(_check_time(t)))

    def sf(self, t: float) -> float:
        return float(self.law.sf(_check_time(t)))

    def prob_below(self, c: float) -> float:
        """Pr(T < c); c may be +inf."""
        if c == math.inf:
            return 1.0
        if c <= 0.0:
            return 0.0
        return self.cdf(c)

    def ppf(self, q: float) -> float:
        if not 0.0 <= q <= 1.0:
            raise ValidationError(f'Quantile level must lie in [0, 1], got {q}')
        return float(self.law.ppf(q))

    def tail_cutoff(self, tail_probability: float = TAIL_PROBABILITY) -> float:
        return float(self.law.isf(tail_probability))

    # transforms

    def check_argument(self, s: float, order: int = 0):
        """Raise DivergentTransform unless E[T**order e^{-sT}] is finite."""
        if not math.isfinite(s):
            raise ValidationError(f'Transform argument must be finite, got {s}')
        if s >= 0.0:
            return
        bound = self.regularity_bound
        if -s < bound:
            return
        if -s == bound and self.regularity_inclusive and order == 0:
            return
        raise DivergentTransformError(
            f'E[exp({-s:g} T)] diverges for {self.kind} (exponential tail rate {bound:g})'
        )

    def laplace(self, s: float, order: int = 0) -> Jet:
        """Jet of E[e^{-sT}] in s: coeff k = (-1)^k E[T^k e^{-sT}] / k!."""
        order = _check_order(order)
        s = float(s)
        self.check_argument(s, order)
        if s == 0.0:
            k = np.arange(order + 1)
            moments = np.array([self.moment(int(i)) for i in k])
            return Jet(_alternating(order) * moments / special.factorial(k), anchor=0.0)
        try:
            jet = self._laplace(s, order)
        except (OverflowError, ZeroDivisionError) as e:
            raise NonFiniteError(f'E[exp({-s:g} T)] of {self.kind} overflows: {e}') from e
        if not np.all(np.isfinite(jet.coeffs)):
            raise NonFiniteError(f'E[T^k exp({-s:g} T)] of {self.kind} is not representable up to order {order}')
        return jet

    def _laplace(self, s: float, order: int) -> Jet:
        raise NotImplementedError

    def laplace_deficit(self, s: float) -> float:
        """1 - E[e^{-sT}] without cancellation; negative for s < 0."""
        s = float(s)
        self.check_argument(s, 0)
        if s == 0.0:
            return 0.0
        try:
            deficit = float(self._deficit(s))
        except (OverflowError, ZeroDivisionError) as e:
            raise NonFiniteError(f'1 - E[exp({-s:g} T)] of {self.kind} overflows: {e}') from e
        if not math.isfinite(deficit):
            raise NonFiniteError(f'1 - E[exp({-s:g} T)] of {self.kind} is not representable')
        return deficit

    def _deficit(self, s: float) -> float:
        return 1.0 - self._laplace(s, 0).value

    # expectations

    def expect(self, g: Callable[[float], object], rel_tol: float = 1e-10,
               points: Optional[Sequence[float]] = None):
        """E[g(T)] for scalar or vector valued g."""
        density = self.law.pdf

        def integrand(t):
            return density(t) * np.asarray(g(t), dtype=float)

        return integrate_semi_infinite(
            integrand, self.tail_cutoff(), rel_tol=rel_tol,
            origin_power=self.origin_power, points=points,
        ).value

    def partial_expectation(self, c: float, rel_tol: float = 1e-10) -> float:
        """E[T; T < c], by integrating the CDF (or the survival function beyond the median)."""
        if c <= 0.0:
            return 0.0
        if c == math.inf:
            return self.mean
        fc = self.cdf(c)
        if fc == 0.0:
            return 0.0
        cdf = self.law.cdf
        sf = self.law.sf

        if fc <= 0.5:
            if self.origin_power < 0.0:
                m = 1.0 / (1.0 + self.origin_power)

                def head(u):
                    t = c * u ** m
                    return (fc - cdf(t)) * c * m * u ** (m - 1.0)

                return float(integrate(head, 0.0, 1.0, rel_tol=rel_tol).value)
            return float(integrate(lambda t: fc - cdf(t), 0.0, c, rel_tol=rel_tol).value)

        sc = 1.0 - fc
        if sc == 0.0:
            return self.mean
        cutoff = max(self.tail_cutoff() - c, self.mean, c)
        beyond = integrate_semi_infinite(lambda t: sf(c + t), cutoff, rel_tol=rel_tol).value
        return float(self.mean - (c * sc + beyond))

    # sampling

    def sample(self, rng: RngStream, size: Optional[int] = None):
        draws = self._sample(rng.generator, size)
        return float(draws) if size is None else np.asarray(draws, dtype=float)

    def _sample(self, generator: np.random.Generator, size):
        raise NotImplementedError

    # rescaling

    def scaled(self, factor: float) -> 'DistributionSpec':
        """Law of factor * T."""
        raise NotImplementedError

    def with_mean(self, mean: float) -> 'DistributionSpec':
        """Same shape, rescaled to the given mean (coefficient of variation kept)."""
        if not (mean > 0.0 and math.isfinite(mean)):
            raise ValidationError(f'Target mean must be positive and finite, got {mean}')
        if self.mean == 0.0:
            raise ValidationError(f'Cannot rescale {self.kind} with zero mean')
        return self.scaled(mean / self.mean)


@register
@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float
    kind: ClassVar[str] = 'exponential'

    @property
    def regularity_bound(self):
        return self.rate

    @cached_property
    def law(self):
        return stats.expon(scale=1.0 / self.rate)

    @property
    def mean(self):
        return 1.0 / self.rate

    def _moment(self, k):
        return math.factorial(k) / self.rate ** k

    @property
    def variance(self):
        return 1.0 / self.rate ** 2

    def _laplace(self, s, order):
        k = np.arange(order + 1)
        base = self.rate + s
        return Jet(_alternating(order) * self.rate / base ** (k + 1), anchor=s)

    def _deficit(self, s):
        return s / (self.rate + s)

    def _sample(self, generator, size):
        return generator.exponential(1.0 / self.rate, size)

    def scaled(self, factor):
        return Exponential(self.rate / factor)


@register
@dataclass(frozen=True)
class Gamma(DistributionSpec):
    shape: float
    scale: float
    kind: ClassVar[str] = 'gamma'

    @property
    def regularity_bound(self):
        return 1.0 / self.scale

    @cached_property
    def law(self):
        return stats.gamma(a=self.shape, scale=self.scale)

    @property
    def mean(self):
        return self.shape * self.scale

    @property
    def origin_power(self):
        return min(self.shape - 1.0, 0.0)

    def _moment(self, k):
        return float(special.poch(self.shape, k)) * self.scale ** k

    @property
    def variance(self):
        return self.shape * self.scale ** 2

    def _laplace(self, s, order):
        k = np.arange(order + 1)
        log_base = math.log1p(self.scale * s)
        log_abs = (special.gammaln(self.shape + k) - special.gammaln(self.shape) - special.gammaln(k + 1)
                   + k * (math.log(self.scale) - log_base) - self.shape * log_base)
        return Jet(_alternating(order) * np.exp(log_abs), anchor=s)

    def _deficit(self, s):
        return -math.expm1(-self.shape * math.log1p(self.scale * s))

    def _sample(self, generator, size):
        return generator.gamma(self.shape, self.scale, size)

    def scaled(self, factor):
        return Gamma(self.shape, self.scale * factor)


@register
@dataclass(frozen=True)
class InverseGaussian(DistributionSpec):
    mean: float
    shape: float
    kind: ClassVar[str] = 'inverse_gaussian'
    regularity_inclusive: ClassVar[bool] = True

    @property
    def regularity_bound(self):
        return self.shape / (2.0 * self.mean ** 2)

    @cached_property
    def law(self):
        return stats.invgauss(mu=self.mean / self.shape, scale=self.shape)

    def _moment(self, n):
        half_ratio = self.mean / (2.0 * self.shape)
        total = sum(
            math.exp(special.gammaln(n + k) - special.gammaln(k + 1) - special.gammaln(n - k)) * half_ratio ** k
            for k in range(n)
        )
        return self.mean ** n * total

    @property
    def variance(self):
        return self.mean ** 3 / self.shape

    def _exponent_arg(self, s):
        return 2.0 * self.mean ** 2 * s / self.shape

    def _laplace(self, s, order):
        y = self._exponent_arg(s)
        if order == 0:
            return Jet([math.exp(-(self.shape / self.mean) * y / (1.0 + math.sqrt(1.0 + y)))], anchor=s)
        inner = 1.0 + Jet.variable(s, order) * (2.0 * self.mean ** 2 / self.shape)
        return jexp((1.0 - jsqrt(inner)) * (self.shape / self.mean))

    def _deficit(self, s):
        y = self._exponent_arg(s)
        return -math.expm1(-(self.shape / self.mean) * y / (1.0 + math.sqrt(1.0 + y)))

    def _sample(self, generator, size):
        return generator.wald(self.mean, self.shape, size)

    def scaled(self, factor):
        return InverseGaussian(self.mean * factor, self.shape * factor)


@lru_cache(maxsize=8)
def _hermite_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_hermite(n)
    keep = w > 0.0
    return x[keep], w[keep]


def _refine_hermite(estimate: Callable[[np.ndarray, np.ndarray], float], log_scale: bool, what: str) -> float:
    """Double the Gauss-Hermite node count until two estimates agree to GH_REL_TOL."""
    n = GH_START_NODES
    previous = estimate(*_hermite_rule(n))
    while n < GH_MAX_NODES:
        n *= 2
        current = estimate(*_hermite_rule(n))
        change = abs(current - previous) if log_scale else abs(current - previous) / max(abs(current), 1e-300)
        if change <= GH_REL_TOL:
            return current
        previous = current
    raise NonConvergentError(f'Gauss-Hermite evaluation of {what} did not settle with {GH_MAX_NODES} nodes')


def _lambert_w_from_log(log_z: float) -> float:
    """Principal branch W(z) given log z, without overflowing z."""
    if log_z < 700.0:
        return float(special.lambertw(math.exp(log_z)).real)
    w = log_z - math.log(log_z)
    for _ in range(100):
        step = (w + math.log(w) - log_z) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * w:
            break
    return w


@register
@dataclass(frozen=True)
class LogNormal(DistributionSpec):
    mu: float
    sigma: float
    kind: ClassVar[str] = 'lognormal'
    regularity_bound: ClassVar[float] = 0.0

    def validate(self):
        if self.sigma <= 0.0:
            raise ValidationError(f'lognormal.sigma must be positive, got {self.sigma}')

    @cached_property
    def law(self):
        return stats.lognorm(s=self.sigma, scale=math.exp(self.mu))

    @property
    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    def _moment(self, k):
        return math.exp(k * self.mu + 0.5 * k * k * self.sigma ** 2)

    @property
    def variance(self):
        return math.expm1(self.sigma ** 2) * math.exp(2.0 * self.mu + self.sigma ** 2)

    def _log_weighted_transform(self, s: float, k: int) -> float:
        """log E[T^k e^{-sT}] for s > 0."""
        mu, sigma = self.mu, self.sigma
        w0 = _lambert_w_from_log(math.log(s) + 2.0 * math.log(sigma) + mu + k * sigma ** 2)
        centre = k * sigma - w0 / sigma
        width = 1.0 / math.sqrt(1.0 + w0)

        def estimate(x, w):
            u = centre + SQRT2 * width * x
            log_t = mu + sigma * u
            with np.errstate(over='ignore'):
                psi = -0.5 * u * u + k * log_t - s * np.exp(log_t)
            # weights enter as logs; far nodes carry weights near the underflow limit
            terms = psi + x * x + np.log(w)
            return math.log(width) - 0.5 * math.log(math.pi) + float(special.logsumexp(terms))

        return _refine_hermite(estimate, True, f'E[T^{k} exp(-{s:g} T)]')

    def _laplace(self, s, order):
        coeffs = np.empty(order + 1)
        for k in range(order + 1):
            coeffs[k] = math.exp(self._log_weighted_transform(s, k) - special.gammaln(k + 1))
        return Jet(_alternating(order) * coeffs, anchor=s)

    def _deficit(self, s):
        if s * self.mean >= 1.0:
            return 1.0 - self._laplace(s, 0).value

        def estimate(x, w):
            with np.errstate(over='ignore'):
                g = -np.expm1(-s * np.exp(self.mu + self.sigma * SQRT2 * x))
            return float(np.dot(w, g)) / math.sqrt(math.pi)

        return _refine_hermite(estimate, False, f'1 - E[exp(-{s:g} T)]')

    def _sample(self, generator, size):
        return generator.lognormal(self.mu, self.sigma, size)

    def scaled(self, factor):
        return LogNormal(self.mu + math.log(factor), self.sigma)


@register
@dataclass(frozen=True)
class Deterministic(DistributionSpec):
    value: float
    kind: ClassVar[str] = 'deterministic'
    is_atom: ClassVar[bool] = True

    def validate(self):
        if self.value < 0.0:
            raise ValidationError(f'deterministic.value must be non-negative, got {self.value}')

    @cached_property
    def law(self):
        raise AtomDensityError('Deterministic law has no scipy density')

    @property
    def mean(self):
        return self.value

    @property
    def support_lower(self):
        return self.value

    @property
    def support_upper(self):
        return self.value

    def _moment(self, k):
        return self.value ** k

    @property
    def variance(self):
        return 0.0

    def pdf(self, t):
        t = _check_time(t)
        if t == self.value:
            raise AtomDensityError(f'Density of Deterministic{{{self.value:g}}} at its atom')
        return 0.0

    def cdf(self, t):
        return 1.0 if _check_time(t) >= self.value else 0.0

    def sf(self, t):
        return 1.0 - self.cdf(t)

    def prob_below(self, c):
        return 1.0 if self.value < c else 0.0

    def ppf(self, q):
        if not 0.0 <= q <= 1.0:
            raise ValidationError(f'Quantile level must lie in [0, 1], got {q}')
        return self.value

    def tail_cutoff(self, tail_probability=TAIL_PROBABILITY):
        return self.value

    def _laplace(self, s, order):
        k = np.arange(order + 1)
        if self.value == 0.0:
            return Jet.constant(1.0, order, anchor=s)
        log_abs = -s * self.value + k * math.log(self.value) - special.gammaln(k + 1)
        return Jet(_alternating(order) * np.exp(log_abs), anchor=s)

    def _deficit(self, s):
        return -math.expm1(-s * self.value)

    def expect(self, g, rel_tol=1e-10, points=None):
        value = np.asarray(g(self.value), dtype=float)
        return float(value) if value.ndim == 0 else value

    def partial_expectation(self, c, rel_tol=1e-10):
        return self.value if self.value < c else 0.0

    def _sample(self, generator, size):
        return self.value if size is None else np.full(size, self.value)

    def scaled(self, factor):
        return Deterministic(self.value * factor)


def density_cdf(d: DistributionSpec, t: float) -> Tuple[float, float]:
    """(density, cdf) at t; density at an atom raises AtomDensity."""
    return d.pdf(t), d.cdf(t)


def laplace(d: DistributionSpec, s: float, order: int = 0) -> Jet:
    return d.laplace(s, order)


def moment(d: DistributionSpec, k: int) -> float:
    return d.moment(k)


def sample(d: DistributionSpec, rng: RngStream, size: Optional[int] = None):
    return d.sample(rng, size)
