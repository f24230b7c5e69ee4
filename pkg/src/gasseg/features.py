"""Acoustic front end: 39-dim MFCCs with utterance-wise CMVN.

Per frame: pre-emphasis 0.97, 25 ms Hamming window every 10 ms, 512-point
power spectrum, 26 triangular mel filters, log (floored at 1e-10), DCT-II,
13 cepstra kept (c0 included). Delta and delta-delta come from the usual
two-frame regression, giving 13 + 13 + 13 columns.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, rfft

from .errors import DataError, NumericalError

N_STATIC = 13
N_DIMS = 39
N_MEL_FILTERS = 26
N_FFT = 512
PRE_EMPHASIS = 0.97
LOG_FLOOR = 1e-10
DELTA_SPAN = 2
CMVN_SIGMA_FLOOR = 1e-8


@dataclass
class FeatureSequence:
    """A (T, 39) feature matrix plus the framing metadata needed to map
    frame indices back to time."""

    frames: np.ndarray
    frame_shift_ms: float = 10.0
    frame_length_ms: float = 25.0
    origin_sample_rate_hz: int = 16000

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[1] != N_DIMS:
            raise ValueError(f"features must be (T, {N_DIMS}), got {self.frames.shape}")
        if self.frames.shape[0] < 2:
            raise ValueError("need at least 2 frames")
        if not np.all(np.isfinite(self.frames)):
            raise NumericalError("non-finite feature values")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def n_frames_for(n_samples: int, sample_rate_hz: int,
                 frame_shift_ms: float = 10.0,
                 frame_length_ms: float = 25.0) -> int:
    """Frame count for the sliding-window convention used here:
    floor((N - window) / hop) + 1."""
    window = int(round(frame_length_ms / 1000.0 * sample_rate_hz))
    hop = int(round(frame_shift_ms / 1000.0 * sample_rate_hz))
    if n_samples < window:
        return 0
    return (n_samples - window) // hop + 1


def frame_time(frame_index: int, frame_shift_ms: float = 10.0,
               frame_length_ms: float = 25.0) -> float:
    """Centre time of a frame, in milliseconds."""
    if frame_index < 0:
        raise ValueError("frame_index must be >= 0")
    return frame_index * frame_shift_ms + frame_length_ms / 2.0

def nearest_frame(time_ms: float, frame_shift_ms: float = 10.0,
                  frame_length_ms: float = 25.0) -> int:
    """Inverse of :func:`frame_time`, rounded to the nearest frame."""
    return max(0, int(round((time_ms - frame_length_ms / 2.0) / frame_shift_ms)))


def _mel(f):
    return 2595.0 * np.log10(1.0 + f / 700.0)


def _mel_inv(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mel_filterbank(sample_rate_hz: int, n_fft: int = N_FFT,
                   n_filters: int = N_MEL_FILTERS) -> np.ndarray:
    """Triangular filters on a mel-spaced grid from 0 Hz to Nyquist;
    shape (n_filters, n_fft//2 + 1)."""
    nyquist = sample_rate_hz / 2.0
    mel_points = np.linspace(_mel(0.0), _mel(nyquist), n_filters + 2)
    hz_points = _mel_inv(mel_points)
    bins = np.floor((n_fft + 1) * hz_points / sample_rate_hz).astype(int)
    fb = np.zeros((n_filters, n_fft // 2 + 1))
    for m in range(1, n_filters + 1):
        left, centre, right = bins[m - 1], bins[m], bins[m + 1]
        for k in range(left, centre):
            if centre > left:
                fb[m - 1, k] = (k - left) / (centre - left)
        for k in range(centre, right):
            if right > centre:
                fb[m - 1, k] = (right - k) / (right - centre)
    return fb


def delta(coeffs: np.ndarray, span: int = DELTA_SPAN) -> np.ndarray:
    """Regression deltas over +-span frames with edge replication."""
    T = coeffs.shape[0]
    padded = np.pad(coeffs, ((span, span), (0, 0)), mode="edge")
    denom = 2.0 * sum(n * n for n in range(1, span + 1))
    out = np.zeros_like(coeffs)
    for n in range(1, span + 1):
        out += n * (padded[span + n:span + n + T] - padded[span - n:span - n + T])
    return out / denom


def mfcc39(wave, frame_shift_ms: float = 10.0,
           frame_length_ms: float = 25.0) -> FeatureSequence:
    """Full 39-dim MFCC front end for one utterance."""
    samples = np.asarray(wave.samples, dtype=np.float64)
    sr = wave.sample_rate_hz
    window = int(round(frame_length_ms / 1000.0 * sr))
    hop = int(round(frame_shift_ms / 1000.0 * sr))
    n_frames = n_frames_for(len(samples), sr, frame_shift_ms, frame_length_ms)
    if n_frames < 2:
        raise DataError(
            f"waveform too short: {len(samples)} samples yield {n_frames} frames")

    emphasized = np.empty_like(samples)
    emphasized[0] = samples[0]
    emphasized[1:] = samples[1:] - PRE_EMPHASIS * samples[:-1]

    idx = np.arange(window)[None, :] + hop * np.arange(n_frames)[:, None]
    framed = emphasized[idx] * np.hamming(window)

    spectrum = rfft(framed, n=N_FFT, axis=1)
    power = (spectrum.real ** 2 + spectrum.imag ** 2) / N_FFT

    fb = mel_filterbank(sr)
    energies = np.maximum(power @ fb.T, LOG_FLOOR)
    static = dct(np.log(energies), type=2, norm="ortho", axis=1)[:, :N_STATIC]

    d1 = delta(static)
    d2 = delta(d1)
    return FeatureSequence(frames=np.hstack([static, d1, d2]),
                           frame_shift_ms=frame_shift_ms,
                           frame_length_ms=frame_length_ms,
                           origin_sample_rate_hz=sr)


def cmvn(features: FeatureSequence) -> FeatureSequence:
    """Utterance-wise mean/variance normalization per dimension.

    Dimensions whose standard deviation falls below the floor come out as
    all zeros.
    """
    x = features.frames
    mean = x.mean(axis=0)
    sigma = x.std(axis=0)
    out = np.zeros_like(x)
    live = sigma > CMVN_SIGMA_FLOOR
    out[:, live] = (x[:, live] - mean[live]) / sigma[live]
    return FeatureSequence(frames=out,
                           frame_shift_ms=features.frame_shift_ms,
                           frame_length_ms=features.frame_length_ms,
                           origin_sample_rate_hz=features.origin_sample_rate_hz)


# ---------------------------------------------------------------------------
# feature cache files: one JSON header line, then raw little-endian float64


def save_features(features: FeatureSequence, path, wav_sha256: str | None = None):
    header = {
        "n_frames": int(features.n_frames),
        "dims": N_DIMS,
        "frame_shift_ms": features.frame_shift_ms,
        "frame_length_ms": features.frame_length_ms,
        "origin_sample_rate_hz": int(features.origin_sample_rate_hz),
    }
    if wav_sha256 is not None:
        header["wav_sha256"] = wav_sha256
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(features.frames, dtype="<f8").tobytes())


def load_features(path):
    """Read a cache file; returns (FeatureSequence, header dict)."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
        t, dims = int(header["n_frames"]), int(header["dims"])
    except (ValueError, KeyError) as exc:
        raise DataError(f"corrupt feature cache header in {path}: {exc}") from exc
    expected = t * dims * 8
    if len(payload) != expected:
        raise DataError(
            f"corrupt feature cache {path}: expected {expected} payload bytes, "
            f"found {len(payload)}")
    frames = np.frombuffer(payload, dtype="<f8").reshape(t, dims).copy()
    seq = FeatureSequence(frames=frames,
                          frame_shift_ms=float(header["frame_shift_ms"]),
                          frame_length_ms=float(header["frame_length_ms"]),
                          origin_sample_rate_hz=int(header["origin_sample_rate_hz"]))
    return seq, header


def sha256_of_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
