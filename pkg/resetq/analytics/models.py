"""
Service model, resetting policy and report types for the analytics layer.
"""

import math
import dataclasses
from dataclasses import dataclass
from typing import Dict, Optional

from resetq.common.errors import ValidationError
from resetq.distributions import Deterministic, DistributionSpec, Exponential

MULTIPLICATIVE = 'multiplicative'
ADDITIVE = 'additive'
COMBINERS = (MULTIPLICATIVE, ADDITIVE)

POLICY_NONE = 'none'
POLICY_POISSON = 'poisson'
POLICY_SHARP = 'sharp'
POLICY_RENEWAL = 'renewal'
POLICY_KINDS = (POLICY_NONE, POLICY_POISSON, POLICY_SHARP, POLICY_RENEWAL)


def check_keys(data: Dict, allowed, where: str):
    if not isinstance(data, dict):
        raise ValidationError(f'{where} must be an object, got {type(data).__name__}')
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValidationError(f'Unknown fields in {where}: {unknown}')


def positive_number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f'{name} must be a number, got {value!r}')
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise ValidationError(f'{name} must be positive and finite, got {value}')
    return value


@dataclass(frozen=True)
class ServiceModel:
    """S&X service: requirement x*S (multiplicative) or x+S (additive) per attempt."""
    combiner: str
    slowdown: DistributionSpec
    jobsize: DistributionSpec

    def __post_init__(self):
        if self.combiner not in COMBINERS:
            raise ValidationError(f'combiner must be one of {list(COMBINERS)}, got {self.combiner!r}')
        for name in ('slowdown', 'jobsize'):
            if not isinstance(getattr(self, name), DistributionSpec):
                raise ValidationError(f'{name} must be a distribution')

    @property
    def is_additive(self) -> bool:
        return self.combiner == ADDITIVE

    def requirement(self, x, s):
        """Work of one attempt for job size x and slowdown draw s (scalars or arrays)."""
        return x + s if self.is_additive else x * s

    def with_parameter(self, path: str, value: float, keep_mean: bool = False) -> 'ServiceModel':
        """
        Copy with one distribution field changed, e.g. path 'slowdown.shape'.
        With keep_mean the changed law is rescaled back to its previous mean.
        """
        target, _, name = path.partition('.')
        if target not in ('slowdown', 'jobsize') or not name:
            raise ValidationError(f'Parameter path must look like slowdown.NAME or jobsize.NAME, got {path!r}')
        law = getattr(self, target)
        if name not in {f.name for f in dataclasses.fields(law)}:
            raise ValidationError(f'{law.kind} has no parameter {name!r}')
        changed = dataclasses.replace(law, **{name: value})
        if keep_mean:
            changed = changed.with_mean(law.mean)
        return dataclasses.replace(self, **{target: changed})

    def to_dict(self):
        return {
            'combiner': self.combiner,
            'slowdown': self.slowdown.to_dict(),
            'jobsize': self.jobsize.to_dict(),
        }

    @classmethod
    def from_dict(cls, data) -> 'ServiceModel':
        check_keys(data, ('combiner', 'slowdown', 'jobsize'), 'model')
        for key in ('combiner', 'slowdown', 'jobsize'):
            if key not in data:
                raise ValidationError(f'model.{key} is required')
        return cls(
            combiner=data['combiner'],
            slowdown=DistributionSpec.from_dict(data['slowdown']),
            jobsize=DistributionSpec.from_dict(data['jobsize']),
        )


@dataclass(frozen=True)
class ResetPolicy:
    """none | poisson(rate) | sharp(period) | renewal(law)."""
    kind: str = POLICY_NONE
    rate: Optional[float] = None
    period: Optional[float] = None
    law: Optional[DistributionSpec] = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValidationError(f'policy kind must be one of {list(POLICY_KINDS)}, got {self.kind!r}')
        expected = {
            POLICY_NONE: (),
            POLICY_POISSON: ('rate',),
            POLICY_SHARP: ('period',),
            POLICY_RENEWAL: ('law',),
        }[self.kind]
        for name in ('rate', 'period', 'law'):
            value = getattr(self, name)
            if name in expected and value is None:
                raise ValidationError(f'{self.kind} policy requires {name}')
            if name not in expected and value is not None:
                raise ValidationError(f'{self.kind} policy takes no {name}')
        if self.rate is not None:
            object.__setattr__(self, 'rate', positive_number(self.rate, 'policy.rate'))
        if self.period is not None:
            object.__setattr__(self, 'period', positive_number(self.period, 'policy.period'))
        if self.law is not None and not isinstance(self.law, DistributionSpec):
            raise ValidationError('policy.law must be a distribution')

    @classmethod
    def none(cls):
        return cls(POLICY_NONE)

    @classmethod
    def poisson(cls, rate: float):
        return cls(POLICY_POISSON, rate=rate)

    @classmethod
    def sharp(cls, period: float):
        return cls(POLICY_SHARP, period=period)

    @classmethod
    def renewal(cls, law: DistributionSpec):
        return cls(POLICY_RENEWAL, law=law)

    @property
    def reset_law(self) -> Optional[DistributionSpec]:
        """Law of the resetting time R, or None when the server never resets."""
        if self.kind == POLICY_POISSON:
            return Exponential(self.rate)
        if self.kind == POLICY_SHARP:
            return Deterministic(self.period)
        return self.law

    def to_dict(self):
        rv = {'kind': self.kind}
        if self.rate is not None:
            rv['rate'] = self.rate
        if self.period is not None:
            rv['period'] = self.period
        if self.law is not None:
            rv['law'] = self.law.to_dict()
        return rv

    @classmethod
    def from_dict(cls, data) -> 'ResetPolicy':
        check_keys(data, ('kind', 'rate', 'period', 'law'), 'policy')
        law = data.get('law')
        return cls(
            kind=data.get('kind', POLICY_NONE),
            rate=data.get('rate'),
            period=data.get('period'),
            law=DistributionSpec.from_dict(law) if law is not None else None,
        )


@dataclass
class BenefitReport:
    combiner: str
    mean_no_reset: float
    slope_at_zero: float
    beneficial: bool
    condition_lhs: float
    condition_rhs: float
    cv_slowdown: float
    reduced_threshold: Optional[float] = None

    def to_dict(self):
        return {
            'combiner': self.combiner,
            'mean_no_reset': self.mean_no_reset,
            'slope_at_zero': self.slope_at_zero,
            'beneficial': self.beneficial,
            'condition_lhs': self.condition_lhs,
            'condition_rhs': self.condition_rhs,
            'cv_slowdown': self.cv_slowdown,
            'reduced_threshold': self.reduced_threshold,
        }


@dataclass
class OptimumReport:
    """Result of an optimal-policy search; `parameter` is 'rate' or 'period'."""
    parameter: str
    argmin: float
    mean: float
    mean_no_reset: float
    monotone: bool
    note: str = ''

    @property
    def improvement(self) -> float:
        return self.mean_no_reset - self.mean

    def to_dict(self):
        rv = {
            'parameter': self.parameter,
            'optimum': self.argmin,
            'mean': self.mean,
            'mean_no_reset': self.mean_no_reset,
            'monotone': self.monotone,
        }
        if self.note:
            rv['note'] = self.note
        return rv
