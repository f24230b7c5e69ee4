"""From detector signals to boundary hypotheses.

The main detector picks strict local maxima above a threshold out of a
detector signal. Two reference segmenters are included: a periodic
predictor (a boundary every k milliseconds) and greedy bottom-up
agglomerative merging of adjacent frame segments by Ward-style cost.
Threshold sweeps evaluate a detector over a grid and report the whole
curve plus the best operating point by R-value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import evaluation, gas, models
from .errors import ConfigError, DataError
from .features import FeatureSequence
from .grnn import GateTag

N_THRESHOLDS = 41
INTERP_WEIGHTS = tuple(round(0.1 * k, 1) for k in range(11))

SOURCES = ("ground_truth", "gas", "rpm", "interpolated", "hac", "periodic")


@dataclass
class BoundarySet:
    """Strictly increasing boundary times in milliseconds."""

    times_ms: list
    source: str = "ground_truth"

    def __post_init__(self):
        self.times_ms = [float(t) for t in self.times_ms]
        if any(b <= a for a, b in zip(self.times_ms, self.times_ms[1:])):
            raise ValueError("boundary times must be strictly increasing")
        if self.source not in SOURCES:
            raise ValueError(f"unknown boundary source {self.source!r}")

    def __len__(self):
        return len(self.times_ms)


_KIND_TO_SOURCE = {"diff_gas": "gas", "rpm_error": "rpm",
                   "interpolated": "interpolated"}


def peak_pick(signal: gas.DetectorSignal, threshold: float) -> BoundarySet:
    """Boundaries at strict local maxima of the signal above the threshold.

    Endpoints never qualify; plateaus of exactly equal values yield
    nothing; signals shorter than 3 points have no interior and give an
    empty set.
    """
    v = signal.values
    times = []
    if v.size >= 3:
        left = v[1:-1] > v[:-2]
        right = v[1:-1] > v[2:]
        above = v[1:-1] > threshold
        for idx in np.nonzero(left & right & above)[0]:
            times.append(signal.boundary_time_ms(int(idx) + 1))
    return BoundarySet(times_ms=times, source=_KIND_TO_SOURCE[signal.kind])


def periodic_boundaries(period_ms: float, duration_ms: float) -> BoundarySet:
    """A boundary every ``period_ms``, excluding any at exactly the end."""
    if period_ms <= 0.0:
        raise ValueError("period must be positive")
    times = []
    k = 1
    while k * period_ms < duration_ms:
        times.append(k * period_ms)
        k += 1
    return BoundarySet(times_ms=times, source="periodic")


# ---------------------------------------------------------------------------
# agglomerative merging of adjacent frame segments


class _Segments:
    """Contiguous segment statistics supporting O(1) Ward merge cost.

    Cost of merging adjacent segments A, B is the increase in total
    within-segment sum of squared deviations:
        |A||B| / (|A|+|B|) * ||mean_A - mean_B||^2.
    """

    def __init__(self, frames):
        self.counts = [1] * len(frames)
        self.sums = [frames[k].copy() for k in range(len(frames))]
        self.starts = list(range(len(frames)))

    def merge_cost(self, k):
        na, nb = self.counts[k], self.counts[k + 1]
        mu_a = self.sums[k] / na
        mu_b = self.sums[k + 1] / nb
        diff = mu_a - mu_b
        return na * nb / (na + nb) * float(diff @ diff)

    def merge(self, k):
        self.counts[k] += self.counts.pop(k + 1)
        self.sums[k] = self.sums[k] + self.sums.pop(k + 1)
        self.starts.pop(k + 1)

    def __len__(self):
        return len(self.counts)


def hac_segment(features: FeatureSequence,
                target_boundary_count: int | None = None,
                merge_threshold: float | None = None) -> BoundarySet:
    """Bottom-up merging of adjacent frames until a stopping criterion.

    Every frame starts as its own segment; the adjacent pair with the
    smallest Ward-style merge cost is merged repeatedly until either
    ``target_boundary_count`` boundaries remain or the cheapest merge
    exceeds ``merge_threshold``. Surviving segment starts (except frame 0)
    are the boundaries.
    """
    if (target_boundary_count is None) == (merge_threshold is None):
        raise ConfigError(
            "specify exactly one of target_boundary_count, merge_threshold")
    frames = features.frames
    T = frames.shape[0]
    if target_boundary_count is not None:
        if not 0 <= target_boundary_count <= T - 1:
            raise ValueError(
                f"target_boundary_count must be in [0, {T - 1}]")
        target_segments = target_boundary_count + 1
    else:
        target_segments = 1

    segs = _Segments(frames)
    while len(segs) > target_segments:
        costs = [segs.merge_cost(k) for k in range(len(segs) - 1)]
        k = int(np.argmin(costs))  # leftmost cheapest pair: deterministic
        if merge_threshold is not None and costs[k] > merge_threshold:
            break
        segs.merge(k)
    times = [start * features.frame_shift_ms for start in segs.starts[1:]]
    return BoundarySet(times_ms=times, source="hac")


# ---------------------------------------------------------------------------
# detectors over a whole corpus


@dataclass(frozen=True)
class DetectorSpec:
    """What to compute from a model: a gate difference ('gas:update'),
    the prediction error ('rpm'), or their interpolation ('interp:0.4')."""

    kind: str                      # gas | rpm | interp
    gate: str | None = None        # short gate name for kind == gas
    weight: float | None = None    # mixing weight for kind == interp

    @classmethod
    def parse(cls, text: str) -> "DetectorSpec":
        parts = text.split(":")
        if parts[0] == "gas" and len(parts) == 2:
            return cls(kind="gas", gate=parts[1])
        if parts[0] == "rpm" and len(parts) == 1:
            return cls(kind="rpm")
        if parts[0] == "interp" and len(parts) == 2:
            try:
                w = float(parts[1])
            except ValueError:
                raise ConfigError(f"bad interpolation weight {parts[1]!r}") from None
            if not 0.0 <= w <= 1.0:
                raise ConfigError("interpolation weight must be in [0, 1]")
            return cls(kind="interp", weight=w)
        raise ConfigError(
            f"cannot parse detector {text!r}; expected gas:<gate>, rpm, "
            "or interp:<weight>")

    def __str__(self):
        if self.kind == "gas":
            return f"gas:{self.gate}"
        if self.kind == "interp":
            return f"interp:{self.weight}"
        return self.kind


def _interp_gate(model: models.TrainedModel) -> GateTag:
    # the gate whose dynamics track whether recurrent memory is overwritten
    return (GateTag.GRU_UPDATE if model.config.cell == "gru"
            else GateTag.LSTM_FORGET)


def detector_signal(model: models.TrainedModel, features: FeatureSequence,
                    detector: DetectorSpec) -> gas.DetectorSignal:
    """The z-scored detector signal for one utterance.

    All detector kinds are normalized per utterance so a single corpus-wide
    threshold is meaningful and interpolation mixes comparable scales; for
    'interp' both components are z-scored before the convex combination.
    """
    shift = features.frame_shift_ms
    if detector.kind == "gas":
        tag = GateTag.from_short(model.config.cell, detector.gate)
        _, traces = models.rpm_forward(model, features, capture={tag}) \
            if model.config.is_predictor \
            else models.ae_forward(model, features, capture={tag})
        trace = _first_layer_trace(traces, tag)
        raw = gas.diff_gas(gas.mean_gas(trace), frame_shift_ms=shift)
        return gas.normalize_signal(raw)
    if detector.kind == "rpm":
        predictions, _ = models.rpm_forward(model, features)
        raw, _ = gas.rpm_error_signal(predictions, features.frames,
                                      frame_shift_ms=shift)
        return gas.normalize_signal(raw)
    if detector.kind == "interp":
        tag = _interp_gate(model)
        predictions, traces = models.rpm_forward(model, features,
                                                 capture={tag})
        trace = _first_layer_trace(traces, tag)
        err, _ = gas.rpm_error_signal(predictions, features.frames,
                                      frame_shift_ms=shift)
        dg = gas.diff_gas(gas.mean_gas(trace), frame_shift_ms=shift)
        return gas.interpolate(gas.normalize_signal(err),
                               gas.normalize_signal(dg), detector.weight)
    raise ConfigError(f"unknown detector kind {detector.kind!r}")


def _first_layer_trace(traces, tag):
    for trace in traces:
        if trace.gate == tag and trace.layer_index == 0:
            return trace
    raise ConfigError(f"no trace captured for {tag.value}")


def corpus_signals(model: models.TrainedModel, features_by_id: dict,
                   detector: DetectorSpec) -> dict:
    return {utt_id: detector_signal(model, feats, detector)
            for utt_id, feats in features_by_id.items()}


# ---------------------------------------------------------------------------
# threshold sweeps


@dataclass
class SweepResult:
    thresholds: list
    results: list                  # EvalResult per threshold
    best_threshold: float
    best_result: "evaluation.EvalResult"
    boundaries_at_best: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.thresholds, self.results))


def default_thresholds(signals: dict, n: int = N_THRESHOLDS):
    """Evenly spaced quantiles of the pooled signal values, min to max."""
    pooled = np.concatenate([s.values for s in signals.values()])
    qs = np.quantile(pooled, np.linspace(0.0, 1.0, n))
    return list(dict.fromkeys(float(q) for q in qs))  # dedupe, keep order


def threshold_sweep(signals: dict, refs: dict,
                    thresholds=None,
                    tolerance_ms: float = evaluation.DEFAULT_TOLERANCE_MS,
                    durations_ms: dict | None = None,
                    exclude_edges: bool = True) -> SweepResult:
    """Evaluate peak picking at every threshold over the whole corpus.

    Returns the full curve and the operating point with the highest
    R-value (ties: lower threshold).
    """
    if not signals:
        raise DataError("no detector signals to sweep")
    if set(signals) != set(refs):
        raise DataError("signal/reference utterance ids differ")
    if thresholds is None:
        thresholds = default_thresholds(signals)
    thresholds = sorted(float(t) for t in thresholds)
    results = []
    all_bounds = []
    for threshold in thresholds:
        hyps = {utt_id: peak_pick(sig, threshold)
                for utt_id, sig in signals.items()}
        results.append(evaluation.evaluate_corpus(
            refs, hyps, tolerance_ms=tolerance_ms, durations_ms=durations_ms,
            exclude_edges=exclude_edges))
        all_bounds.append(hyps)
    best_idx = max(range(len(thresholds)),
                   key=lambda k: (results[k].r_value, -thresholds[k]))
    return SweepResult(thresholds=thresholds, results=results,
                       best_threshold=thresholds[best_idx],
                       best_result=results[best_idx],
                       boundaries_at_best=all_bounds[best_idx])
