"""One declarative configuration document for the whole pipeline.

A run config is a JSON object with optional sections ``corpus``,
``features``, ``model``, ``train``, ``segment`` and ``eval`` plus a single
top-level ``seed``. Unknown keys anywhere are rejected. Stage seeds that
are left null are derived deterministically from the top-level seed, so a
single integer pins the entire run while any stage stays reproducible in
isolation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import SyntheticSpec
from .errors import ConfigError
from .models import ModelConfig, TrainConfig

# fixed stage tags for seed derivation; changing these changes every
# derived stream
_STAGE_IDS = {"corpus": 1, "train": 2, "noise": 3, "init": 4}


def derive_seed(root_seed: int, stage: str) -> int:
    if stage not in _STAGE_IDS:
        raise ConfigError(f"unknown seed stage {stage!r}")
    seq = np.random.SeedSequence([int(root_seed), _STAGE_IDS[stage]])
    return int(seq.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF)


@dataclass
class FeatureConfig:
    frame_shift_ms: float = 10.0
    frame_length_ms: float = 25.0

    def to_dict(self):
        return {"frame_shift_ms": self.frame_shift_ms,
                "frame_length_ms": self.frame_length_ms}


@dataclass
class SegmentConfig:
    detector: str = "gas:update"
    thresholds: list | None = None     # explicit grid; None = quantile grid
    n_thresholds: int = 41
    interp_weights: list = field(
        default_factory=lambda: [round(0.1 * k, 1) for k in range(11)])

    def to_dict(self):
        return {"detector": self.detector, "thresholds": self.thresholds,
                "n_thresholds": self.n_thresholds,
                "interp_weights": self.interp_weights}


@dataclass
class EvalConfig:
    tolerance_ms: float = 20.0
    exclude_edges: bool = True

    def to_dict(self):
        return {"tolerance_ms": self.tolerance_ms,
                "exclude_edges": self.exclude_edges}


def _build_section(cls, data, section):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config section {section!r} must be an object")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad {section} config: {exc}") from exc


@dataclass
class RunConfig:
    seed: int = 0
    corpus: SyntheticSpec = field(default_factory=SyntheticSpec)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    segment: SegmentConfig = field(default_factory=SegmentConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    SECTIONS = ("corpus", "features", "model", "train", "segment", "eval")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        unknown = set(data) - set(cls.SECTIONS) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        seed = int(data.pop("seed", 0))

        corpus_data = dict(data.get("corpus") or {})
        if corpus_data.get("seed") is None:
            corpus_data["seed"] = derive_seed(seed, "corpus")
        train_data = dict(data.get("train") or {})
        if train_data.get("seed") is None:
            train_data["seed"] = derive_seed(seed, "train")

        return cls(
            seed=seed,
            corpus=_build_section(SyntheticSpec, corpus_data, "corpus"),
            features=_build_section(FeatureConfig, data.get("features"),
                                    "features"),
            model=_build_section(ModelConfig, data.get("model"), "model"),
            train=_build_section(TrainConfig, train_data, "train"),
            segment=_build_section(SegmentConfig, data.get("segment"),
                                   "segment"),
            eval=_build_section(EvalConfig, data.get("eval"), "eval"),
        )

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "corpus": self.corpus.to_dict(),
            "features": self.features.to_dict(),
            "model": self.model.to_dict(),
            "train": self.train.to_dict(),
            "segment": self.segment.to_dict(),
            "eval": self.eval.to_dict(),
        }
