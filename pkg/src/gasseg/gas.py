"""Turning gate traces and prediction errors into boundary-detector signals.

A gate activation signal is the per-frame vector of one gate's activations
across all units of a recurrent layer. Its unit mean moves sharply when the
input statistics change, so the forward difference of the mean is a boundary
detector. A next-frame predictor provides a second detector: its per-frame
squared prediction error. The two can be mixed by a convex combination after
per-utterance z-scoring puts them on a common scale.

Index convention: a detector value at index t is evidence for a boundary at
the transition between frames t and t+1, i.e. at time (t+1) * frame_shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .grnn import GateTag, GateTrace

SIGNAL_KINDS = ("diff_gas", "rpm_error", "interpolated")


@dataclass
class GasSeries:
    """One gate's activations: per-unit matrix and its unit mean."""

    mean_values: np.ndarray
    per_unit: np.ndarray
    gate: GateTag
    layer_index: int

    def __post_init__(self):
        self.mean_values = np.asarray(self.mean_values, dtype=np.float64)
        self.per_unit = np.asarray(self.per_unit, dtype=np.float64)
        if self.per_unit.ndim != 2:
            raise ValueError("per_unit must be T x J")
        if self.mean_values.shape != (self.per_unit.shape[0],):
            raise ValueError("mean_values length must match per_unit rows")

    @property
    def n_frames(self):
        return self.per_unit.shape[0]


@dataclass
class DetectorSignal:
    """Length T-1 boundary-evidence series aligned to frame transitions."""

    values: np.ndarray
    kind: str
    frame_shift_ms: float = 10.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("detector signal must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("non-finite detector signal")
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")

    def boundary_time_ms(self, index: int) -> float:
        """Time of the frame transition that index t points at."""
        return (index + 1) * self.frame_shift_ms


def mean_gas(trace: GateTrace) -> GasSeries:
    """Average the gate activations over units, frame by frame."""
    values = trace.values
    return GasSeries(mean_values=values.mean(axis=1), per_unit=values,
                     gate=trace.gate, layer_index=trace.layer_index)


def diff_gas(series: GasSeries, frame_shift_ms: float = 10.0) -> DetectorSignal:
    """Forward difference of the unit-mean signal: d_t = mean_{t+1} - mean_t."""
    if series.n_frames < 2:
        raise ValueError("need at least 2 frames to difference")
    return DetectorSignal(values=np.diff(series.mean_values),
                          kind="diff_gas", frame_shift_ms=frame_shift_ms)


def diff_gas_per_unit(trace: GateTrace) -> np.ndarray:
    """Per-unit forward differences, (T-1, J). Its unit mean equals the
    difference of the unit means."""
    if trace.values.shape[0] < 2:
        raise ValueError("need at least 2 frames to difference")
    return np.diff(trace.values, axis=0)


def rpm_error_signal(predictions, targets,
                     frame_shift_ms: float = 10.0):
    """Squared next-frame prediction error per transition.

    ``targets`` is the full (T, d) feature matrix; ``predictions`` holds the
    T-1 next-frame estimates. Returns (DetectorSignal, per_dim) where
    per_dim[t, j] is the squared error in dimension j and the signal is its
    mean over dimensions.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape[0] != targets.shape[0] - 1 \
            or predictions.shape[1] != targets.shape[1]:
        raise ValueError(
            f"predictions {predictions.shape} do not match targets {targets.shape}")
    per_dim = (targets[1:] - predictions) ** 2
    signal = DetectorSignal(values=per_dim.mean(axis=1), kind="rpm_error",
                            frame_shift_ms=frame_shift_ms)
    return signal, per_dim


def interpolate(error_signal: DetectorSignal, gas_signal: DetectorSignal,
                w: float) -> DetectorSignal:
    """Convex combination (1-w) * error + w * gas-difference."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"interpolation weight must be in [0, 1], got {w}")
    if error_signal.values.shape != gas_signal.values.shape:
        raise ValueError("signal length mismatch")
    if error_signal.frame_shift_ms != gas_signal.frame_shift_ms:
        raise ValueError("signals use different frame clocks")
    values = (1.0 - w) * error_signal.values + w * gas_signal.values
    return DetectorSignal(values=values, kind="interpolated",
                          frame_shift_ms=error_signal.frame_shift_ms)


def normalize_signal(signal: DetectorSignal) -> DetectorSignal:
    """Z-score over the utterance; a constant signal maps to zeros."""
    if signal.values.size < 2:
        raise ValueError("need at least 2 values to normalize")
    mean = signal.values.mean()
    sigma = signal.values.std()
    if sigma <= 0.0:
        values = np.zeros_like(signal.values)
    else:
        values = (signal.values - mean) / sigma
    return DetectorSignal(values=values, kind=signal.kind,
                          frame_shift_ms=signal.frame_shift_ms)
