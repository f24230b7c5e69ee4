import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from helpers import hac_greedy_oracle

from gasseg import evaluation, features, gas, segment
from gasseg.errors import ConfigError
from gasseg.segment import BoundarySet, DetectorSpec


def signal(values, kind="diff_gas", shift=10.0):
    return gas.DetectorSignal(values=np.asarray(values, dtype=float),
                              kind=kind, frame_shift_ms=shift)


class TestPeakPick:
    def test_single_peak(self):
        picked = segment.peak_pick(signal([0.0, 1.0, 0.0]), 0.5)
        assert picked.times_ms == [20.0]  # transition into frame 2

    def test_monotone_signal_has_no_peaks(self):
        picked = segment.peak_pick(signal([0.0, 0.3, 0.6, 0.9]), -1.0)
        assert picked.times_ms == []

    def test_sub_threshold_peak_ignored(self):
        picked = segment.peak_pick(signal([0.0, 1.0, 0.0, 0.4, 0.0]), 0.5)
        assert picked.times_ms == [20.0]

    def test_plateau_yields_nothing(self):
        picked = segment.peak_pick(signal([0.0, 1.0, 1.0, 0.0]), 0.5)
        assert picked.times_ms == []

    def test_short_signal_gives_empty_set(self):
        picked = segment.peak_pick(signal([0.0, 1.0]), -1.0)
        assert picked.times_ms == []

    def test_source_follows_signal_kind(self):
        picked = segment.peak_pick(signal([0.0, 1.0, 0.0], kind="rpm_error"), 0.5)
        assert picked.source == "rpm"

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1),
           st.floats(min_value=-1.0, max_value=1.0),
           st.floats(min_value=0.01, max_value=1.0))
    def test_raising_threshold_never_adds_boundaries(self, seed, low, delta):
        r = np.random.default_rng(seed)
        sig = signal(r.standard_normal(r.integers(3, 60)))
        at_low = set(segment.peak_pick(sig, low).times_ms)
        at_high = set(segment.peak_pick(sig, low + delta).times_ms)
        assert at_high <= at_low

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1),
           st.floats(min_value=0.01, max_value=50.0),
           st.floats(min_value=-5.0, max_value=5.0))
    def test_peak_set_invariant_under_positive_affine_map(self, seed, scale,
                                                          offset):
        r = np.random.default_rng(seed)
        values = r.standard_normal(30)
        base = segment.peak_pick(signal(values), 0.2)
        mapped = segment.peak_pick(signal(scale * values + offset),
                                   scale * 0.2 + offset)
        assert mapped.times_ms == base.times_ms


class TestPeriodic:
    def test_forty_ms_grid(self):
        assert segment.periodic_boundaries(40.0, 200.0).times_ms \
            == [40.0, 80.0, 120.0, 160.0]

    def test_eighty_ms_grid(self):
        assert segment.periodic_boundaries(80.0, 200.0).times_ms == [80.0, 160.0]

    def test_period_longer_than_duration(self):
        assert segment.periodic_boundaries(300.0, 200.0).times_ms == []

    def test_rejects_nonpositive_period(self):
        with pytest.raises(ValueError):
            segment.periodic_boundaries(0.0, 100.0)


class TestHac:
    def _feats(self, frames):
        return features.FeatureSequence(frames=np.asarray(frames, dtype=float))

    def test_one_segment_has_no_boundaries(self, rng):
        feats = self._feats(rng.standard_normal((6, 39)))
        picked = segment.hac_segment(feats, target_boundary_count=0)
        assert picked.times_ms == []

    def test_all_frames_separate(self, rng):
        feats = self._feats(rng.standard_normal((6, 39)))
        picked = segment.hac_segment(feats, target_boundary_count=5)
        assert picked.times_ms == [10.0, 20.0, 30.0, 40.0, 50.0]

    def test_matches_independent_greedy_oracle(self, rng):
        for trial in range(5):
            frames = rng.standard_normal((6, 39))
            feats = self._feats(frames)
            picked = segment.hac_segment(feats, target_boundary_count=2)
            expected = hac_greedy_oracle(frames.tolist(), 3)
            assert picked.times_ms == [f * 10.0 for f in expected]

    def test_boundary_count_decreases_one_per_merge(self, rng):
        frames = rng.standard_normal((8, 39))
        feats = self._feats(frames)
        for n_bounds in range(7, -1, -1):
            picked = segment.hac_segment(feats, target_boundary_count=n_bounds)
            assert len(picked.times_ms) == n_bounds

    def test_excessive_target_rejected(self, rng):
        feats = self._feats(rng.standard_normal((6, 39)))
        with pytest.raises(ValueError):
            segment.hac_segment(feats, target_boundary_count=6)

    def test_exactly_one_stopping_rule(self, rng):
        feats = self._feats(rng.standard_normal((6, 39)))
        with pytest.raises(ConfigError):
            segment.hac_segment(feats)
        with pytest.raises(ConfigError):
            segment.hac_segment(feats, target_boundary_count=2,
                                merge_threshold=1.0)

    def test_merge_threshold_splits_clear_clusters(self):
        # two obviously different halves: the cheap within-half merges all
        # happen, the expensive cross-half merge does not
        frames = np.vstack([np.zeros((5, 39)), np.full((5, 39), 10.0)])
        frames += 0.01 * np.random.default_rng(0).standard_normal((10, 39))
        feats = self._feats(frames)
        picked = segment.hac_segment(feats, merge_threshold=1.0)
        assert picked.times_ms == [50.0]


class TestDetectorSpec:
    def test_parse_gas(self):
        spec = DetectorSpec.parse("gas:update")
        assert (spec.kind, spec.gate) == ("gas", "update")

    def test_parse_rpm(self):
        assert DetectorSpec.parse("rpm").kind == "rpm"

    def test_parse_interp(self):
        spec = DetectorSpec.parse("interp:0.4")
        assert spec.weight == pytest.approx(0.4)

    def test_reject_garbage(self):
        with pytest.raises(ConfigError):
            DetectorSpec.parse("magic")
        with pytest.raises(ConfigError):
            DetectorSpec.parse("interp:1.5")

    def test_round_trip_str(self):
        for text in ("gas:forget", "rpm", "interp:0.3"):
            assert str(DetectorSpec.parse(text)) == text


class TestThresholdSweep:
    def _corpus(self, rng, n_utts=4, t=50):
        signals, refs, durations = {}, {}, {}
        for k in range(n_utts):
            uid = f"u{k}"
            signals[uid] = signal(rng.standard_normal(t))
            times = np.sort(rng.choice(np.arange(2, t - 2), size=5,
                                       replace=False)).astype(float) * 10.0
            refs[uid] = BoundarySet(times_ms=list(times))
            durations[uid] = (t + 1) * 10.0
        return signals, refs, durations

    def test_threshold_above_max_gives_zero_recall(self, rng):
        signals, refs, durations = self._corpus(rng)
        top = max(s.values.max() for s in signals.values())
        sweep = segment.threshold_sweep(signals, refs, thresholds=[top + 1.0],
                                        durations_ms=durations)
        assert sweep.results[0].n_hyp == 0
        assert sweep.results[0].recall == 0.0

    def test_best_dominates_every_grid_point(self, rng):
        signals, refs, durations = self._corpus(rng)
        sweep = segment.threshold_sweep(signals, refs, durations_ms=durations)
        best = sweep.best_result.r_value
        assert all(best >= res.r_value for res in sweep.results)

    def test_single_threshold_sweep_equals_direct_evaluation(self, rng):
        signals, refs, durations = self._corpus(rng)
        sweep = segment.threshold_sweep(signals, refs, thresholds=[0.7],
                                        durations_ms=durations)
        hyps = {u: segment.peak_pick(s, 0.7) for u, s in signals.items()}
        direct = evaluation.evaluate_corpus(refs, hyps, durations_ms=durations)
        assert sweep.results[0] == direct

    def test_interpolation_gains_at_least_rpm_alone(self, rng):
        # with w = 0 in the grid and per-signal threshold grids, the mixed
        # detector can never do worse than the error signal by itself
        signals_e, refs, durations = self._corpus(rng)
        best_rpm = segment.threshold_sweep(
            signals_e, refs, durations_ms=durations).best_result.r_value
        best_mixed = best_rpm
        for w in (0.0, 0.5, 1.0):
            mixed = {}
            for uid, e_sig in signals_e.items():
                d_sig = signal(rng.standard_normal(e_sig.values.size))
                mixed[uid] = gas.interpolate(
                    signal(e_sig.values, kind="rpm_error"), d_sig, w)
            res = segment.threshold_sweep(mixed, refs,
                                          durations_ms=durations)
            best_mixed = max(best_mixed, res.best_result.r_value)
        assert best_mixed >= best_rpm

    def test_quantile_grid_covers_min_and_max(self, rng):
        signals, refs, durations = self._corpus(rng)
        grid = segment.default_thresholds(signals)
        pooled = np.concatenate([s.values for s in signals.values()])
        assert grid[0] == pytest.approx(pooled.min())
        assert grid[-1] == pytest.approx(pooled.max())
        assert len(grid) <= segment.N_THRESHOLDS
