"""Corpus handling: WAV utterances, phone annotations, synthetic data.

Real data enters as mono RIFF/WAVE files with TIMIT-style ``.phn`` sidecar
annotations ("start_sample end_sample label" per line). The synthetic
generator is the canonical desk-scale corpus: utterances concatenated from
piecewise-stationary segments whose spectral profiles differ sharply across
every junction, so the annotation boundaries are exactly the concatenation
points.
"""

from __future__ import annotations

import io
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import __version__
from .errors import ConfigError, DataError

DEFAULT_SAMPLE_RATE = 16000
MIN_SEGMENT_MS = 30.0
MANIFEST_NAME = "manifest.json"

# per-label band centres: >= 500 Hz apart so adjacent segments always have
# clearly separated spectral envelopes; levels alternate so junctions also
# carry an energy contrast
_BAND_CENTRES_HZ = (350.0, 900.0, 1450.0, 2000.0, 2550.0, 3100.0, 3650.0, 4200.0)
_BAND_WIDTH_HZ = 300.0
_TONE_FUNDAMENTALS_HZ = (220.0, 330.0, 440.0, 587.0, 784.0, 1047.0, 1397.0, 1865.0)
_LABEL_RMS = (0.25, 0.04, 0.14, 0.025, 0.2, 0.06, 0.1, 0.035)


@dataclass
class Waveform:
    """Mono audio: float64 samples (nominally in [-1, 1]) at a fixed rate."""

    samples: np.ndarray
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise DataError("empty waveform")
        if not np.all(np.isfinite(self.samples)):
            raise DataError("non-finite samples")
        if self.sample_rate_hz <= 0:
            raise DataError("sample rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def duration_ms(self) -> float:
        return self.n_samples * 1000.0 / self.sample_rate_hz


@dataclass
class PhoneAnnotation:
    """Contiguous labelled intervals in samples; interior edges are the
    phone boundaries."""

    intervals: list

    def __post_init__(self):
        if not self.intervals:
            raise DataError("annotation has no intervals")
        prev_end = None
        for start, end, _label in self.intervals:
            if end <= start:
                raise DataError(f"empty interval ({start}, {end})")
            if prev_end is not None and start != prev_end:
                raise DataError(
                    f"non-contiguous intervals: {prev_end} then {start}")
            prev_end = end

    def boundary_samples(self) -> list:
        """Interior boundaries only: the shared edges between intervals."""
        return [start for start, _end, _label in self.intervals[1:]]

    def boundary_times_ms(self, sample_rate_hz: int) -> list:
        return [s * 1000.0 / sample_rate_hz for s in self.boundary_samples()]


def read_wav(path) -> Waveform:
    """Load a mono PCM16 or float32 WAV, normalizing to [-1, 1]."""
    try:
        rate, data = wavfile.read(path)
    except (ValueError, EOFError, struct.error) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if data.ndim != 1:
        raise DataError(f"{path}: multi-channel audio is not supported")
    if data.size == 0:
        raise DataError(f"{path}: empty waveform")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    elif data.dtype == np.float64:
        samples = data.copy()
    else:
        raise DataError(
            f"{path}: unsupported sample encoding {data.dtype}; "
            "expected PCM 16-bit or 32-bit float")
    return Waveform(samples=samples, sample_rate_hz=int(rate))


def write_wav(wave: Waveform, path, encoding: str = "float32") -> None:
    if encoding == "float32":
        wavfile.write(path, wave.sample_rate_hz,
                      wave.samples.astype(np.float32))
    elif encoding == "pcm16":
        clipped = np.clip(wave.samples, -1.0, 1.0)
        wavfile.write(path, wave.sample_rate_hz,
                      np.round(clipped * 32767.0).astype(np.int16))
    else:
        raise ConfigError(f"unknown wav encoding {encoding!r}")


def parse_phn(text: str, sample_rate_hz: int = DEFAULT_SAMPLE_RATE) -> PhoneAnnotation:
    """Parse TIMIT-style annotation text into a PhoneAnnotation."""
    intervals = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DataError(f"line {lineno}: expected 'start end label'")
        try:
            start, end = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-integer sample index") from exc
        intervals.append((start, end, parts[2]))
    return PhoneAnnotation(intervals=intervals)


def add_white_noise(wave: Waveform, snr_db: float, seed) -> Waveform:
    """Add Gaussian white noise scaled, against the realized noise power,
    to an exact utterance-level SNR."""
    signal_power = float(np.mean(wave.samples ** 2))
    if signal_power <= 0.0:
        raise DataError("undefined SNR: input signal has zero power")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(wave.n_samples)
    noise_power = float(np.mean(noise ** 2))
    target_power = signal_power / (10.0 ** (snr_db / 10.0))
    noise *= np.sqrt(target_power / noise_power)
    return Waveform(samples=wave.samples + noise,
                    sample_rate_hz=wave.sample_rate_hz)


# ---------------------------------------------------------------------------
# synthetic corpus


@dataclass
class SyntheticSpec:
    """Recipe for a deterministic desk-scale corpus."""

    num_utterances: int = 50
    segments_per_utterance: tuple = (6, 10)        # inclusive range
    segment_duration_ms: tuple = (80.0, 200.0)
    generator_kind: str = "noise_bands"            # or "harmonic_tones"
    seed: int = 0
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE
    noise_snr_db: float | None = None

    def __post_init__(self):
        if self.num_utterances <= 0:
            raise ConfigError("num_utterances must be positive")
        lo, hi = self.segments_per_utterance
        if not (0 < lo <= hi):
            raise ConfigError("segments_per_utterance range is empty")
        dlo, dhi = self.segment_duration_ms
        if not (0 < dlo <= dhi):
            raise ConfigError("segment_duration_ms range is empty")
        if dlo < MIN_SEGMENT_MS:
            raise ConfigError(
                f"segments shorter than {MIN_SEGMENT_MS:.0f} ms cannot span "
                "two analysis frames")
        if self.generator_kind not in ("noise_bands", "harmonic_tones"):
            raise ConfigError(f"unknown generator kind {self.generator_kind!r}")

    def to_dict(self):
        return {
            "num_utterances": self.num_utterances,
            "segments_per_utterance": list(self.segments_per_utterance),
            "segment_duration_ms": list(self.segment_duration_ms),
            "generator_kind": self.generator_kind,
            "seed": self.seed,
            "sample_rate_hz": self.sample_rate_hz,
            "noise_snr_db": self.noise_snr_db,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        for key in ("segments_per_utterance", "segment_duration_ms"):
            if key in data:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad corpus config: {exc}") from exc


def _band_noise_segment(n, sr, centre_hz, rng):
    """White noise restricted to one frequency band via FFT masking."""
    x = rng.standard_normal(n)
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    lo = centre_hz - _BAND_WIDTH_HZ / 2.0
    hi = centre_hz + _BAND_WIDTH_HZ / 2.0
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    return np.fft.irfft(spectrum, n=n)


def _tone_segment(n, sr, f0_hz, rng):
    t = np.arange(n) / sr
    out = np.zeros(n)
    for harmonic in range(1, 4):
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out += (0.6 ** (harmonic - 1)) * np.sin(
            2.0 * np.pi * harmonic * f0_hz * t + phase)
    return out


def _normalize_rms(x, target):
    rms = np.sqrt(np.mean(x ** 2))
    if rms <= 0.0:
        return x
    return x * (target / rms)


def synth_utterance(spec: SyntheticSpec, utt_index: int):
    """Build one utterance deterministically from (seed, utt_index).

    Returns (Waveform, PhoneAnnotation); annotation boundaries sit exactly
    at the segment concatenation points.
    """
    rng = np.random.default_rng([spec.seed, utt_index])
    lo, hi = spec.segments_per_utterance
    n_segments = int(rng.integers(lo, hi + 1))
    sr = spec.sample_rate_hz
    n_labels = len(_BAND_CENTRES_HZ)

    pieces = []
    intervals = []
    cursor = 0
    prev_label = -1
    for _ in range(n_segments):
        if prev_label < 0:
            label = int(rng.integers(0, n_labels))
        else:
            # uniform over the labels other than the previous one, so every
            # junction is a genuine spectral change
            label = int(rng.integers(0, n_labels - 1))
            if label >= prev_label:
                label += 1
        prev_label = label
        dur_ms = rng.uniform(*spec.segment_duration_ms)
        n = int(round(dur_ms / 1000.0 * sr))
        if spec.generator_kind == "noise_bands":
            seg = _band_noise_segment(n, sr, _BAND_CENTRES_HZ[label], rng)
        else:
            seg = _tone_segment(n, sr, _TONE_FUNDAMENTALS_HZ[label], rng)
        pieces.append(_normalize_rms(seg, _LABEL_RMS[label]))
        intervals.append((cursor, cursor + n, f"p{label}"))
        cursor += n

    wave = Waveform(samples=np.concatenate(pieces), sample_rate_hz=sr)
    if spec.noise_snr_db is not None:
        wave = add_white_noise(wave, spec.noise_snr_db,
                               seed=[spec.seed, utt_index, 0xA0])
    return wave, PhoneAnnotation(intervals=intervals)


def synth_corpus(spec: SyntheticSpec):
    """All utterances of the spec, as a list of (Waveform, PhoneAnnotation)."""
    return [synth_utterance(spec, k) for k in range(spec.num_utterances)]


# ---------------------------------------------------------------------------
# on-disk corpus layout: <dir>/wav/*.wav + <dir>/manifest.json


def utterance_id(index: int) -> str:
    return f"utt_{index:04d}"


def write_corpus(corpus_dir, spec: SyntheticSpec):
    """Synthesize and store a corpus; returns the manifest dict."""
    corpus_dir = Path(corpus_dir)
    wav_dir = corpus_dir / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    utterances = []
    for k in range(spec.num_utterances):
        wave, annot = synth_utterance(spec, k)
        utt_id = utterance_id(k)
        rel = os.path.join("wav", utt_id + ".wav")
        write_wav(wave, corpus_dir / rel, encoding="float32")
        utterances.append({
            "id": utt_id,
            "wav": rel,
            "n_samples": wave.n_samples,
            "boundaries_samples": annot.boundary_samples(),
            "labels": [label for _s, _e, label in annot.intervals],
        })
    manifest = {
        "format_version": 1,
        "tool_version": __version__,
        "kind": "corpus_manifest",
        "sample_rate_hz": spec.sample_rate_hz,
        "config": spec.to_dict(),
        "utterances": utterances,
    }
    with open(corpus_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest


def load_manifest(corpus_dir):
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"no {MANIFEST_NAME} in {corpus_dir}")
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt manifest {path}: {exc}") from exc
    if manifest.get("kind") != "corpus_manifest":
        raise DataError(f"{path} is not a corpus manifest")
    if manifest.get("format_version") != 1:
        raise DataError(
            f"unsupported manifest version {manifest.get('format_version')}")
    return manifest


def import_real_corpus(source_dir, corpus_dir, sample_rate_hz=None):
    """Ingest a directory tree of paired .wav/.phn files (TIMIT layout) into
    the manifest format. Returns the manifest dict.

    Annotation edges at sample 0 and at the final sample are the utterance
    edges; only interior edges become boundaries.
    """
    source_dir = Path(source_dir)
    corpus_dir = Path(corpus_dir)
    wav_dir = corpus_dir / "wav"
    wav_dir.mkdir(parents=True, exist_ok=True)
    pairs = sorted(p for p in source_dir.rglob("*.wav")
                   if p.with_suffix(".phn").exists())
    if not pairs:
        pairs = sorted(p for p in source_dir.rglob("*.WAV")
                       if p.with_suffix(".PHN").exists())
    if not pairs:
        raise DataError(f"no wav/phn pairs under {source_dir}")
    utterances = []
    rate = None
    for k, wav_path in enumerate(pairs):
        wave = read_wav(wav_path)
        if sample_rate_hz is not None and wave.sample_rate_hz != sample_rate_hz:
            raise DataError(
                f"{wav_path}: sample rate {wave.sample_rate_hz} != {sample_rate_hz}")
        if rate is None:
            rate = wave.sample_rate_hz
        elif wave.sample_rate_hz != rate:
            raise DataError(f"{wav_path}: mixed sample rates in corpus")
        annot = parse_phn(wav_path.with_suffix(
            ".phn" if wav_path.suffix == ".wav" else ".PHN").read_text(),
            wave.sample_rate_hz)
        utt_id = utterance_id(k)
        rel = os.path.join("wav", utt_id + ".wav")
        write_wav(wave, corpus_dir / rel, encoding="float32")
        utterances.append({
            "id": utt_id,
            "wav": rel,
            "source": str(wav_path),
            "n_samples": wave.n_samples,
            "boundaries_samples": annot.boundary_samples(),
            "labels": [label for _s, _e, label in annot.intervals],
        })
    manifest = {
        "format_version": 1,
        "tool_version": __version__,
        "kind": "corpus_manifest",
        "sample_rate_hz": rate,
        "config": {"source": str(source_dir)},
        "utterances": utterances,
    }
    with open(corpus_dir / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return manifest
