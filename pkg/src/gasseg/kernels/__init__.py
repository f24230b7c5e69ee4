"""Recurrent sequence kernels with a compiled core and a numpy fallback.

At import time this package binds the LSTM/GRU forward and backward-through-
time kernels either to the Cython extension (:mod:`gasseg.kernels._seqcore`)
or, when the extension is unavailable, to the pure-numpy reference
implementation. Both expose identical signatures and conventions; see
:mod:`gasseg.kernels.reference` for the contract.

``GASSEG_BACKEND=python`` (or ``cython``) in the environment forces one
backend; forcing ``cython`` raises if the extension was not built.
"""

import os

from ..errors import ConfigError

_requested = os.environ.get("GASSEG_BACKEND", "").strip().lower()

if _requested in ("python", "numpy", "reference"):
    from . import reference as _impl
    BACKEND = "python"
elif _requested in ("", "cython", "compiled"):
    try:
        from . import _seqcore as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        if _requested:
            raise
        from . import reference as _impl
        BACKEND = "python"
else:
    raise ConfigError(f"unknown GASSEG_BACKEND value: {_requested!r}")

lstm_forward = _impl.lstm_forward
lstm_backward = _impl.lstm_backward
gru_forward = _impl.gru_forward
gru_backward = _impl.gru_backward


def available_backends():
    """Map of importable backend name -> kernel module (for tests/benchmarks)."""
    from . import reference
    found = {"python": reference}
    try:
        from . import _seqcore  # type: ignore[attr-defined]
        found["cython"] = _seqcore
    except ImportError:
        pass
    return found


__all__ = [
    "BACKEND",
    "available_backends",
    "lstm_forward",
    "lstm_backward",
    "gru_forward",
    "gru_backward",
]
