import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasseg import corpus, features
from gasseg.errors import DataError


def _tone(freq_hz=1000.0, seconds=1.0, sr=16000):
    t = np.arange(int(sr * seconds)) / sr
    return corpus.Waveform(samples=0.4 * np.sin(2 * np.pi * freq_hz * t),
                           sample_rate_hz=sr)


class TestMfcc:
    def test_output_width_is_39(self):
        feats = features.mfcc39(_tone())
        assert feats.frames.shape[1] == 39

    def test_frame_count_matches_framing_arithmetic(self):
        # 1.0 s at 16 kHz with a 400-sample window and 160-sample hop
        feats = features.mfcc39(_tone(seconds=1.0))
        expected = (16000 - 400) // 160 + 1
        assert expected == 98
        assert feats.n_frames == expected

    def test_frame_count_helper_agrees_with_extraction(self):
        for seconds in (0.31, 0.5, 1.27):
            wave = _tone(seconds=seconds)
            assert features.mfcc39(wave).n_frames == features.n_frames_for(
                wave.n_samples, wave.sample_rate_hz)

    def test_stationary_tone_has_constant_statics(self):
        # 1 kHz puts an integer number of cycles in each 10 ms hop, so all
        # frames past the pre-emphasis edge see the same waveform chunk
        feats = features.mfcc39(_tone(freq_hz=1000.0))
        static = feats.frames[2:-2, :13]
        assert np.abs(static - static[0]).max() < 1e-6
        # the +-2 regression (cascaded twice for delta-delta) spreads the
        # frame-0 edge over the first 3 resp. 5 frames
        assert np.abs(feats.frames[3:-3, 13:26]).max() < 1e-6
        assert np.abs(feats.frames[5:-5, 26:]).max() < 1e-6

    def test_too_short_waveform_rejected(self):
        with pytest.raises(DataError, match="too short"):
            features.mfcc39(corpus.Waveform(samples=np.ones(300)))

    def test_deterministic(self):
        wave = _tone(freq_hz=440.0)
        a = features.mfcc39(wave)
        b = features.mfcc39(wave)
        assert np.array_equal(a.frames, b.frames)


class TestCmvn:
    def test_moments_after_normalization(self, rng):
        raw = rng.standard_normal((50, 39)) * 3.0 + 1.5
        out = features.cmvn(features.FeatureSequence(frames=raw))
        assert np.abs(out.frames.mean(axis=0)).max() < 1e-9
        assert np.abs(out.frames.var(axis=0) - 1.0).max() < 1e-6

    def test_matches_two_pass_oracle(self, rng):
        raw = rng.standard_normal((10, 39))
        out = features.cmvn(features.FeatureSequence(frames=raw))
        for d in range(39):
            col = raw[:, d]
            mean = sum(col) / len(col)
            var = sum((v - mean) ** 2 for v in col) / len(col)
            expected = (col - mean) / np.sqrt(var)
            assert np.allclose(out.frames[:, d], expected, atol=1e-12)

    def test_idempotent(self, rng):
        raw = rng.standard_normal((30, 39))
        once = features.cmvn(features.FeatureSequence(frames=raw))
        twice = features.cmvn(once)
        assert np.abs(twice.frames - once.frames).max() < 1e-9

    def test_constant_dimension_zeroed(self, rng):
        raw = rng.standard_normal((20, 39))
        raw[:, 7] = 4.2
        out = features.cmvn(features.FeatureSequence(frames=raw))
        assert np.all(out.frames[:, 7] == 0.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_idempotence_property(self, seed):
        r = np.random.default_rng(seed)
        raw = r.normal(scale=r.uniform(0.5, 20.0), size=(r.integers(2, 40), 39))
        once = features.cmvn(features.FeatureSequence(frames=raw))
        twice = features.cmvn(once)
        assert np.abs(twice.frames - once.frames).max() < 1e-9


class TestFrameTiming:
    def test_first_frame_centre(self):
        assert features.frame_time(0, 10.0, 25.0) == pytest.approx(12.5)

    def test_tenth_frame_centre(self):
        assert features.frame_time(10, 10.0, 25.0) == pytest.approx(112.5)

    def test_round_trip_over_all_frames(self):
        for t in range(98):
            time_ms = features.frame_time(t, 10.0, 25.0)
            assert features.nearest_frame(time_ms, 10.0, 25.0) == t

    def test_boundary_sample_to_ms_is_monotone(self, tiny_corpus):
        for wave, annot in tiny_corpus:
            times = annot.boundary_times_ms(wave.sample_rate_hz)
            assert times == sorted(times)


class TestFeatureCache:
    def test_round_trip(self, tmp_path, rng):
        seq = features.FeatureSequence(frames=rng.standard_normal((17, 39)))
        path = tmp_path / "u.feat"
        features.save_features(seq, path, wav_sha256="ab" * 32)
        loaded, header = features.load_features(path)
        assert np.array_equal(loaded.frames, seq.frames)
        assert header["wav_sha256"] == "ab" * 32
        assert header["n_frames"] == 17

    def test_truncated_payload_rejected(self, tmp_path, rng):
        seq = features.FeatureSequence(frames=rng.standard_normal((9, 39)))
        path = tmp_path / "u.feat"
        features.save_features(seq, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-16])
        with pytest.raises(DataError, match="corrupt"):
            features.load_features(path)

    def test_garbage_header_rejected(self, tmp_path):
        path = tmp_path / "u.feat"
        path.write_bytes(b"not json\n" + b"\x00" * 64)
        with pytest.raises(DataError):
            features.load_features(path)

    def test_header_is_single_json_line(self, tmp_path, rng):
        seq = features.FeatureSequence(frames=rng.standard_normal((5, 39)))
        path = tmp_path / "u.feat"
        features.save_features(seq, path)
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
        assert {"n_frames", "dims", "frame_shift_ms",
                "frame_length_ms"} <= set(header)
