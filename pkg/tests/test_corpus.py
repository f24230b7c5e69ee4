import numpy as np
import pytest

from gasseg import corpus
from gasseg.errors import ConfigError, DataError


class TestWavIO:
    def test_pcm16_fullscale_reads_near_one(self, tmp_path):
        path = tmp_path / "full.wav"
        data = np.array([32767, -32768, 0], dtype=np.int16)
        from scipy.io import wavfile
        wavfile.write(path, 16000, data)
        wave = corpus.read_wav(path)
        assert wave.samples[0] == pytest.approx(1.0, abs=1e-4)
        assert wave.samples[1] == pytest.approx(-1.0, abs=1e-4)
        assert wave.samples[2] == 0.0

    def test_empty_wav_rejected(self, tmp_path):
        path = tmp_path / "empty.wav"
        from scipy.io import wavfile
        wavfile.write(path, 16000, np.zeros(0, dtype=np.int16))
        with pytest.raises(DataError, match="empty"):
            corpus.read_wav(path)

    def test_multichannel_rejected(self, tmp_path):
        path = tmp_path / "stereo.wav"
        from scipy.io import wavfile
        wavfile.write(path, 16000, np.zeros((10, 2), dtype=np.int16))
        with pytest.raises(DataError, match="multi-channel"):
            corpus.read_wav(path)

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "good.wav"
        from scipy.io import wavfile
        wavfile.write(path, 16000, np.zeros(1000, dtype=np.int16))
        blob = path.read_bytes()
        bad = tmp_path / "trunc.wav"
        bad.write_bytes(blob[:20])
        with pytest.raises(DataError):
            corpus.read_wav(bad)

    def test_float32_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(5)
        original = rng.uniform(-0.8, 0.8, 4000).astype(np.float32)
        wave = corpus.Waveform(samples=original.astype(np.float64),
                               sample_rate_hz=16000)
        path = tmp_path / "rt.wav"
        corpus.write_wav(wave, path, encoding="float32")
        back = corpus.read_wav(path)
        assert back.sample_rate_hz == 16000
        assert np.array_equal(back.samples.astype(np.float32), original)


class TestParsePhn:
    def test_basic_parse(self):
        annot = corpus.parse_phn("0 3050 h#\n3050 4559 sh")
        assert annot.intervals == [(0, 3050, "h#"), (3050, 4559, "sh")]
        assert annot.boundary_samples() == [3050]

    def test_non_contiguous_rejected(self):
        with pytest.raises(DataError, match="non-contiguous"):
            corpus.parse_phn("0 100 a\n200 300 b")

    def test_single_interval_has_no_boundaries(self):
        annot = corpus.parse_phn("0 4000 sil")
        assert annot.boundary_samples() == []

    def test_non_integer_field_rejected(self):
        with pytest.raises(DataError, match="non-integer"):
            corpus.parse_phn("0 x a")

    def test_non_monotonic_rejected(self):
        with pytest.raises(DataError):
            corpus.parse_phn("0 100 a\n100 90 b")


class TestWhiteNoise:
    def _wave(self, seconds=0.6):
        rng = np.random.default_rng(3)
        n = int(16000 * seconds)
        return corpus.Waveform(samples=0.2 * rng.standard_normal(n))

    def test_huge_snr_is_nearly_identity(self):
        wave = self._wave()
        noisy = corpus.add_white_noise(wave, 120.0, seed=0)
        rms = np.sqrt(np.mean((noisy.samples - wave.samples) ** 2))
        assert rms < 1e-3

    def test_realized_snr_within_tenth_db(self):
        wave = self._wave()
        noisy = corpus.add_white_noise(wave, 6.0, seed=0)
        noise = noisy.samples - wave.samples
        realized = 10.0 * np.log10(np.mean(wave.samples ** 2)
                                   / np.mean(noise ** 2))
        assert realized == pytest.approx(6.0, abs=0.1)

    def test_deterministic_per_seed(self):
        wave = self._wave()
        a = corpus.add_white_noise(wave, 6.0, seed=17)
        b = corpus.add_white_noise(wave, 6.0, seed=17)
        assert np.array_equal(a.samples, b.samples)

    def test_silent_input_rejected(self):
        silent = corpus.Waveform(samples=np.zeros(1000))
        with pytest.raises(DataError, match="undefined SNR"):
            corpus.add_white_noise(silent, 6.0, seed=0)


class TestSynthCorpus:
    def test_single_segment_has_no_boundaries(self):
        spec = corpus.SyntheticSpec(num_utterances=2,
                                    segments_per_utterance=(1, 1), seed=0)
        for wave, annot in corpus.synth_corpus(spec):
            assert annot.boundary_samples() == []

    def test_k_segments_give_k_minus_one_boundaries(self):
        spec = corpus.SyntheticSpec(num_utterances=3,
                                    segments_per_utterance=(5, 5), seed=1)
        for wave, annot in corpus.synth_corpus(spec):
            assert len(annot.boundary_samples()) == 4

    def test_boundaries_interior_and_increasing(self, tiny_corpus):
        for wave, annot in tiny_corpus:
            bounds = annot.boundary_samples()
            assert bounds == sorted(bounds)
            assert len(set(bounds)) == len(bounds)
            assert all(0 < b < wave.n_samples for b in bounds)

    def test_adjacent_segments_have_distinct_labels(self, tiny_corpus):
        for _wave, annot in tiny_corpus:
            labels = [lab for _s, _e, lab in annot.intervals]
            assert all(a != b for a, b in zip(labels, labels[1:]))

    def test_deterministic_per_seed(self):
        spec = corpus.SyntheticSpec(num_utterances=2, seed=7)
        first = corpus.synth_corpus(spec)
        second = corpus.synth_corpus(spec)
        for (w1, a1), (w2, a2) in zip(first, second):
            assert np.array_equal(w1.samples, w2.samples)
            assert a1.intervals == a2.intervals

    def test_too_short_segments_rejected(self):
        with pytest.raises(ConfigError):
            corpus.SyntheticSpec(segment_duration_ms=(10.0, 50.0))

    def test_harmonic_generator_works(self):
        spec = corpus.SyntheticSpec(num_utterances=1, seed=2,
                                    generator_kind="harmonic_tones")
        wave, annot = corpus.synth_corpus(spec)[0]
        assert wave.n_samples == annot.intervals[-1][1]


class TestCorpusOnDisk:
    def test_write_and_reload_manifest(self, tmp_path, tiny_spec):
        manifest = corpus.write_corpus(tmp_path / "c", tiny_spec)
        loaded = corpus.load_manifest(tmp_path / "c")
        assert loaded == manifest
        assert len(loaded["utterances"]) == tiny_spec.num_utterances
        first = loaded["utterances"][0]
        wave = corpus.read_wav(tmp_path / "c" / first["wav"])
        assert wave.n_samples == first["n_samples"]

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DataError, match="manifest"):
            corpus.load_manifest(tmp_path)

    def test_import_real_corpus_round_trip(self, tmp_path):
        src = tmp_path / "timitish" / "dr1"
        src.mkdir(parents=True)
        rng = np.random.default_rng(0)
        wave = corpus.Waveform(samples=0.1 * rng.standard_normal(8000))
        corpus.write_wav(wave, src / "sa1.wav", encoding="pcm16")
        (src / "sa1.phn").write_text("0 3000 h#\n3000 6000 ih\n6000 8000 h#\n")
        manifest = corpus.import_real_corpus(tmp_path / "timitish",
                                             tmp_path / "ingested")
        assert len(manifest["utterances"]) == 1
        assert manifest["utterances"][0]["boundaries_samples"] == [3000, 6000]
