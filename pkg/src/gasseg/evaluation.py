"""Boundary scoring: tolerance matching, precision/recall/F1 and R-value.

Hypothesis boundaries match reference boundaries one-to-one inside a
+-tolerance window (20 ms by default). From the pooled corpus counts we
report precision, recall, F1, the hit rate HR (= recall), the
over-segmentation rate OS = recall/precision - 1 and the R-value

    r1 = sqrt((1 - HR)^2 + OS^2)
    r2 = (-OS + HR - 1) / sqrt(2)
    R  = (1 - (|r1| + |r2|) / 2) * 100

which rewards operating near HR = 1, OS = 0 and, unlike F1, punishes
over-segmentation hard.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError

DEFAULT_TOLERANCE_MS = 20.0


@dataclass
class EvalResult:
    n_ref: int
    n_hyp: int
    n_hit: int
    precision: float
    recall: float
    f1: float
    hr: float
    os: float
    r_value: float
    floored: bool = False  # r_value clamped because precision was 0

    @classmethod
    def from_counts(cls, n_ref: int, n_hyp: int, n_hit: int) -> "EvalResult":
        if n_hit > min(n_ref, n_hyp):
            raise ValueError("more hits than boundaries")
        precision, recall, f1 = precision_recall_f1(n_ref, n_hyp, n_hit)
        r = r_value(precision, recall) if precision > 0.0 else 0.0
        floored = precision == 0.0
        os = (recall / precision - 1.0) if precision > 0.0 else float("inf")
        return cls(n_ref=n_ref, n_hyp=n_hyp, n_hit=n_hit,
                   precision=precision, recall=recall, f1=f1,
                   hr=recall, os=os, r_value=r, floored=floored)


def match_boundaries(ref, hyp, tolerance_ms: float = DEFAULT_TOLERANCE_MS) -> int:
    """One-to-one hit count between sorted boundary lists.

    Walks the hypotheses in increasing time; each claims the nearest
    still-unmatched reference within +-tolerance (earlier reference on a
    distance tie).
    """
    ref_times = _times(ref)
    hyp_times = _times(hyp)
    taken = [False] * len(ref_times)
    hits = 0
    for h in hyp_times:
        best = -1
        best_dist = None
        for k, r in enumerate(ref_times):
            if taken[k]:
                continue
            dist = abs(r - h)
            if dist <= tolerance_ms and (best_dist is None or dist < best_dist):
                best = k
                best_dist = dist
        if best >= 0:
            taken[best] = True
            hits += 1
    return hits


def _times(boundary_set):
    times = getattr(boundary_set, "times_ms", boundary_set)
    return list(times)


def precision_recall_f1(n_ref: int, n_hyp: int, n_hit: int):
    """Standard definitions on counts; degenerate denominators give 0."""
    precision = n_hit / n_hyp if n_hyp > 0 else 0.0
    recall = n_hit / n_ref if n_ref > 0 else 0.0
    f1 = f_score(precision, recall)
    return precision, recall, f1


def f_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def r_value(precision: float, recall: float) -> float:
    """R-value on the percent scale.

    Arguments may be fractions in [0, 1] or percentages; values above 1 are
    taken as percentages (both arguments share one scale). Zero precision
    means unbounded over-segmentation and floors the score at 0.
    """
    if precision > 1.0 or recall > 1.0:
        precision = precision / 100.0
        recall = recall / 100.0
    if precision <= 0.0:
        return 0.0
    hr = recall
    os = recall / precision - 1.0
    r1 = ((1.0 - hr) ** 2 + os ** 2) ** 0.5
    r2 = (-os + hr - 1.0) / 2.0 ** 0.5
    return (1.0 - (abs(r1) + abs(r2)) / 2.0) * 100.0


def strip_edges(times_ms, duration_ms: float):
    """Drop boundaries at exactly time zero or at/past the utterance end."""
    return [t for t in times_ms if 0.0 < t < duration_ms]


def evaluate_corpus(refs: dict, hyps: dict,
                    tolerance_ms: float = DEFAULT_TOLERANCE_MS,
                    durations_ms: dict | None = None,
                    exclude_edges: bool = True) -> EvalResult:
    """Micro-averaged evaluation: counts pooled over utterances, metrics
    computed once from the pooled counts.

    ``refs`` and ``hyps`` map utterance id -> boundary times (or
    BoundarySet); ids must agree exactly. With ``exclude_edges`` (the
    default), boundaries at exactly 0 or at the utterance end are dropped
    from both sides first, which needs ``durations_ms``.
    """
    if set(refs) != set(hyps):
        missing = sorted(set(refs) ^ set(hyps))
        raise DataError(f"utterance id mismatch between ref and hyp: {missing[:5]}")
    if exclude_edges and durations_ms is None:
        raise DataError("edge exclusion needs utterance durations")
    n_ref = n_hyp = n_hit = 0
    for utt_id in sorted(refs):
        ref_times = _times(refs[utt_id])
        hyp_times = _times(hyps[utt_id])
        if exclude_edges:
            duration = durations_ms[utt_id]
            ref_times = strip_edges(ref_times, duration)
            hyp_times = strip_edges(hyp_times, duration)
        n_ref += len(ref_times)
        n_hyp += len(hyp_times)
        n_hit += match_boundaries(ref_times, hyp_times, tolerance_ms)
    return EvalResult.from_counts(n_ref, n_hyp, n_hit)
