import pytest

from resetq.analytics.models import ADDITIVE, MULTIPLICATIVE, ServiceModel
from resetq.app import create_app
from resetq.config import TestConfig
from resetq.distributions import Deterministic, Exponential, Gamma, InverseGaussian


@pytest.fixture
def app():
    return create_app(TestConfig)


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def gamma_additive():
    """Highly variable Gamma slowdown (mean 1/2, variance 25), job size 2/3."""
    return ServiceModel(ADDITIVE, Gamma(0.01, 50.0), Deterministic(2.0 / 3.0))


@pytest.fixture
def ig_multiplicative():
    """Inverse Gaussian slowdown with CV^2 = 2, job size 2/3."""
    return ServiceModel(MULTIPLICATIVE, InverseGaussian(1.5, 0.75), Deterministic(2.0 / 3.0))


@pytest.fixture
def exponential_multiplicative():
    return ServiceModel(MULTIPLICATIVE, Exponential(1.0), Deterministic(1.0))
