"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericalError -> 3.
"""


class GassegError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GassegError):
    """Invalid configuration: unknown keys, out-of-range values, bad flags."""


class DataError(GassegError):
    """Malformed or missing input data (WAV files, annotations, caches)."""


class NumericalError(GassegError):
    """Non-finite values where finite ones are required."""


class TrainingDiverged(NumericalError):
    """Training hit a non-finite loss.

    Carries the last parameter snapshot that was still finite so callers can
    checkpoint it.
    """

    def __init__(self, message, last_good_parameters=None, loss_history=None):
        super().__init__(message)
        self.last_good_parameters = last_good_parameters
        self.loss_history = loss_history if loss_history is not None else []
