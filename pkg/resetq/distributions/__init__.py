from resetq.distributions.families import (
    Deterministic,
    DistributionSpec,
    Exponential,
    Gamma,
    InverseGaussian,
    LogNormal,
    density_cdf,
    laplace,
    moment,
    sample,
)
from resetq.distributions.rng import RngStream

__all__ = [
    'Deterministic',
    'DistributionSpec',
    'Exponential',
    'Gamma',
    'InverseGaussian',
    'LogNormal',
    'RngStream',
    'density_cdf',
    'laplace',
    'moment',
    'sample',
]
