"""Exceptions raised across inlslab.

Each class carries the exit code the command line reports for it.
"""


class InlsError(Exception):

    """Base class for every inlslab error."""

    exit_code = 1


class ValidationError(InlsError):

    """Inputs or results that fail validation."""

    exit_code = 2


class ConfigError(ValidationError):

    """Malformed run configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)
        self.line = line


class RegimeError(ValidationError):

    """Parameters outside the hypotheses of the scattering theorem."""


class SearchExhausted(ValidationError):

    """No exponent witness found within the search budget."""

    def __init__(self, message, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class WindowTooShort(ValidationError):

    """Too few trusted samples for a fit."""


class ScatteringError(ValidationError):

    """Checkpoints that cannot support the scattering construction."""


class NonFiniteField(ValidationError):

    """A field holding NaN or Inf values."""


class StepBlowup(InlsError):

    """A solver step produced non-finite values.

    :step: index of the failing step
    :output: partial run output recorded before the failure
    """

    exit_code = 3

    def __init__(self, step, output=None):
        super().__init__('Non-finite field after step {}'.format(step))
        self.step = step
        self.output = output


class ArtifactError(InlsError):

    """Missing or corrupt run directory contents."""

    exit_code = 4
