"""
Custom exceptions for the fake task detection application.
"""

import logging

logger = logging.getLogger('fakeguard.core')


class FakeGuardError(Exception):
    """Base exception for every error raised by the experiment tooling."""
    error_code = 'fakeguard_error'

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details


class ConfigurationError(FakeGuardError):
    """Raised when a generation, SOFM, training or CLI configuration is invalid."""
    error_code = 'configuration_error'


class DomainError(FakeGuardError):
    """Raised when input data violates an operation's precondition."""
    error_code = 'domain_error'


class StateError(FakeGuardError):
    """Raised when a model is used before it reached the required state."""
    error_code = 'state_error'


class TrainingError(FakeGuardError):
    """Raised when network training diverges."""
    error_code = 'training_error'

    def __init__(self, message, epoch=None, learning_rate=None):
        super().__init__(message, details={'epoch': epoch, 'learning_rate': learning_rate})
        self.epoch = epoch
        self.learning_rate = learning_rate


class ConsistencyError(FakeGuardError):
    """Raised when prediction subsets do not cover the test set exactly once."""
    error_code = 'consistency_error'


class ArtifactParseError(FakeGuardError):
    """Raised when a dataset, model or report file cannot be parsed."""
    error_code = 'parse_error'

    def __init__(self, message, field=None, path=None):
        super().__init__(message, details={'field': field, 'path': str(path) if path else None})
        self.field = field
        self.path = path


class PipelineError(FakeGuardError):
    """Raised when a stage of the full experiment fails."""
    error_code = 'pipeline_error'

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}", details={'stage': stage})
        self.stage = stage
        self.cause = cause


def error_payload(exc):
    """
    Build the uniform error payload for an exception.

    Known errors keep their code and details; anything else is logged and
    reported as an internal error.
    """
    if isinstance(exc, PipelineError) and isinstance(exc.cause, FakeGuardError):
        return {
            'error': exc.error_code,
            'message': str(exc),
            'details': {**(exc.cause.details or {}), 'stage': exc.stage,
                        'cause': exc.cause.error_code},
        }

    if isinstance(exc, FakeGuardError):
        return {
            'error': exc.error_code,
            'message': str(exc),
            'details': exc.details,
        }

    if isinstance(exc, OSError):
        return {
            'error': 'io_error',
            'message': f"{exc.strerror or exc}: {exc.filename}" if exc.filename else str(exc),
            'details': {'path': exc.filename},
        }

    logger.error(
        f"Unexpected error: {exc}",
        exc_info=True,
        extra={'error_type': type(exc).__name__},
    )
    return {
        'error': 'internal_error',
        'message': 'An unexpected error occurred',
        'details': None,
    }
