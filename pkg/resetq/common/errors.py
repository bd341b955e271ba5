import logging
import click

logger = logging.getLogger(__name__)


class ResetQError(Exception):
    exit_code = 1
    name = 'ResetQError'

    def __init__(self, message, exit_code=None, payload=None):
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        self.payload = payload

    def to_dict(self):
        rv = dict(self.payload or ())
        rv['error'] = self.name
        rv['message'] = self.message
        return rv


class ValidationError(ResetQError):
    exit_code = 2
    name = 'ValidationError'


class DomainError(ResetQError):
    exit_code = 3
    name = 'DomainError'


class DivergentTransformError(DomainError):
    name = 'DivergentTransform'


class NonCompletingError(DomainError):
    name = 'NonCompleting'


class UnstableError(DomainError):
    name = 'Unstable'


class NonConvergentError(DomainError):
    name = 'NonConvergent'


class NonFiniteError(DomainError):
    name = 'NonFinite'


class ZeroConstantTermDivisionError(DomainError):
    name = 'ZeroConstantTermDivision'


class SeriesIllConditionedError(DomainError):
    name = 'SeriesIllConditioned'


class AttemptBudgetExceededError(DomainError):
    name = 'AttemptBudgetExceeded'


class AtomDensityError(DomainError):
    name = 'AtomDensity'


def handle_error(error):
    """Report an error on stderr and return the process exit code."""
    if isinstance(error, ResetQError):
        click.echo(f'{error.name}: {error.message}', err=True)
        return error.exit_code

    logger.exception('Unexpected failure')
    click.echo(f'InternalError: {error}', err=True)
    return 1
