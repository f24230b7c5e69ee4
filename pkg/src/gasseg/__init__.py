"""Unsupervised phoneme boundary detection from recurrent gate activations.

The pipeline: synthesize or ingest a speech corpus, extract 39-dim MFCC
features with utterance-wise CMVN, train a gated recurrent autoencoder or
next-frame predictor without labels, read the gate activation signals out of
the recurrent layers, and turn their temporal differences (or the predictor's
error signal) into phoneme boundary hypotheses scored by R-value.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    GassegError,
    NumericalError,
    TrainingDiverged,
)

__all__ = [
    "__version__",
    "GassegError",
    "ConfigError",
    "DataError",
    "NumericalError",
    "TrainingDiverged",
]
