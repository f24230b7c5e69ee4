"""The two unsupervised sequence models and their training loop.

``ae_grnn`` reconstructs each input frame causally through an
encoder/decoder stack (feed-forward + recurrent encoder, mirrored decoder,
linear readout back to the feature dimension). ``rpm_2layer`` and
``rpm_4layer`` share the same stacks but are trained to predict the *next*
frame, so their output at step t estimates x_{t+1} from x_1..x_t.

Both losses are per-frame mean-squared error scaled by 1/d and summed over
frames and utterances:

    L = sum_n sum_t (1/d) * ||x_t - y_t||^2        (reconstruction)
    L = sum_n sum_{t<T} (1/d) * ||x_{t+1} - y_t||^2  (prediction)
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import __version__, grnn
from .errors import ConfigError, DataError, NumericalError, TrainingDiverged
from .features import FeatureSequence

CHECKPOINT_VERSION = 1

ARCHITECTURES = ("ae_grnn", "rpm_2layer", "rpm_4layer")
INIT_SCALE = 0.08


@dataclass
class ModelConfig:
    cell: str = "gru"
    recurrent_units: int = 32
    ff_units: int = 64
    dropout_rate: float = 0.3
    input_dim: int = 39
    architecture: str = "ae_grnn"

    def __post_init__(self):
        if self.cell not in ("lstm", "gru"):
            raise ConfigError(f"unknown cell {self.cell!r}")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        if min(self.recurrent_units, self.ff_units, self.input_dim) <= 0:
            raise ConfigError("layer sizes must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must be in [0, 1)")

    @property
    def is_predictor(self) -> bool:
        return self.architecture.startswith("rpm")

    @property
    def loss_kind(self) -> str:
        return "prediction" if self.is_predictor else "reconstruction"

    def to_dict(self):
        return {
            "cell": self.cell,
            "recurrent_units": self.recurrent_units,
            "ff_units": self.ff_units,
            "dropout_rate": self.dropout_rate,
            "input_dim": self.input_dim,
            "architecture": self.architecture,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad model config: {exc}") from exc


@dataclass
class TrainedModel:
    config: ModelConfig
    network: grnn.Network
    seed: int = 0
    epochs: int = 0
    final_loss: float | None = None

    def parameters(self):
        return grnn.parameters(self.network)

    @property
    def gate_tags(self):
        return grnn.GateTag.for_cell(self.config.cell)


def _recurrent(cell, n_units, input_dim, rng):
    if cell == "lstm":
        params = grnn.init_lstm_params(n_units, input_dim, rng, INIT_SCALE)
    else:
        params = grnn.init_gru_params(n_units, input_dim, rng, INIT_SCALE)
    return grnn.RecurrentLayer(cell, params)


def _ff(n_out, n_in, rng, dropout_rate):
    w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_out, n_in))
    return grnn.FeedForwardLayer(w, np.zeros(n_out), dropout_rate=dropout_rate)


def _linear(n_out, n_in, rng):
    w = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_out, n_in))
    return grnn.LinearLayer(w, np.zeros(n_out))


def build(config: ModelConfig, seed: int = 0) -> TrainedModel:
    """Construct an untrained model; parameter draws are ordered so equal
    (config, seed) pairs build identical networks."""
    rng = np.random.default_rng(seed)
    d, j, ff = config.input_dim, config.recurrent_units, config.ff_units
    drop = config.dropout_rate
    names = []
    layers = []

    names.append("enc_fc")
    layers.append(_ff(ff, d, rng, drop))
    names.append("enc_rnn")
    layers.append(_recurrent(config.cell, j, ff, rng))
    if config.architecture in ("ae_grnn", "rpm_4layer"):
        names.append("dec_rnn")
        layers.append(_recurrent(config.cell, j, j, rng))
        names.append("dec_fc")
        layers.append(_ff(ff, j, rng, drop))
        names.append("readout")
        layers.append(_linear(d, ff, rng))
    else:  # rpm_2layer
        names.append("readout")
        layers.append(_linear(d, j, rng))

    network = grnn.Network(layer_names=names, layers=layers)
    return TrainedModel(config=config, network=network, seed=seed)


def parameter_count(model: TrainedModel) -> int:
    return sum(p.size for p in model.parameters().values())


def _frames_of(features):
    if isinstance(features, FeatureSequence):
        return features.frames
    return np.asarray(features, dtype=np.float64)


def ae_forward(model: TrainedModel, features, capture=frozenset()):
    """Causal reconstruction: returns ((T, d) output, gate traces)."""
    if model.config.architecture != "ae_grnn":
        raise ConfigError(
            f"ae_forward needs an ae_grnn model, got {model.config.architecture}")
    return grnn.forward_sequence(model.network, _frames_of(features),
                                 capture=capture)


def rpm_forward(model: TrainedModel, features, capture=frozenset()):
    """Next-frame predictions: returns ((T-1, d) predictions, traces).

    The network runs over all T frames (gate traces span the full
    sequence); the final output row, which would predict beyond the
    utterance, is dropped.
    """
    if not model.config.is_predictor:
        raise ConfigError(
            f"rpm_forward needs a predictor model, got {model.config.architecture}")
    x = _frames_of(features)
    if x.shape[0] < 2:
        raise ValueError("prediction needs at least 2 frames")
    outputs, traces = grnn.forward_sequence(model.network, x, capture=capture)
    return outputs[:-1], traces


def ae_loss(reconstruction, target) -> float:
    """Summed per-frame reconstruction error, (1/d) * ||x_t - y_t||^2.

    Accepts one (T, d) pair or two equal-length sequences of such pairs
    (a batch); the batch loss is the plain sum over utterances.
    """
    if isinstance(reconstruction, (list, tuple)):
        if len(reconstruction) != len(target):
            raise ValueError("batch length mismatch")
        return float(sum(ae_loss(r, t) for r, t in zip(reconstruction, target)))
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if reconstruction.shape != target.shape:
        raise ValueError(
            f"shape mismatch: {reconstruction.shape} vs {target.shape}")
    diff = reconstruction - target
    return float((diff * diff).sum() / reconstruction.shape[1])


def rpm_loss(predictions, target) -> float:
    """Summed per-transition prediction error against the next frame.

    ``predictions`` has T-1 rows; ``target`` is the full (T, d) feature
    matrix. Also accepts batches like :func:`ae_loss`.
    """
    if isinstance(predictions, (list, tuple)):
        if len(predictions) != len(target):
            raise ValueError("batch length mismatch")
        return float(sum(rpm_loss(p, t) for p, t in zip(predictions, target)))
    predictions = np.asarray(predictions, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if predictions.shape[0] != target.shape[0] - 1 \
            or predictions.shape[1] != target.shape[1]:
        raise ValueError(
            f"predictions {predictions.shape} do not match target {target.shape}")
    return ae_loss(predictions, target[1:])


@dataclass
class TrainConfig:
    # batch_size 1 because the 30-epoch default budget on a 50-utterance
    # corpus leaves too few optimizer steps for convergence at larger sizes
    epochs: int = 30
    batch_size: int = 1
    lr: float = 1e-3
    seed: int = 0
    clip_norm: float | None = None

    def to_dict(self):
        return {"epochs": self.epochs, "batch_size": self.batch_size,
                "lr": self.lr, "seed": self.seed, "clip_norm": self.clip_norm}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad train config: {exc}") from exc


def train(model: TrainedModel, corpus_features, train_config: TrainConfig):
    """Adam over shuffled utterance batches.

    ``corpus_features`` maps utterance id -> FeatureSequence (any mapping
    with stable iteration order). Returns (trained_model, loss_history),
    one mean per-frame loss entry per epoch. Deterministic for a fixed
    seed. A non-finite loss aborts with the last finite epoch's parameters
    attached to the exception.
    """
    if not corpus_features:
        raise DataError("empty training corpus")
    ids = list(corpus_features)
    frames = [_frames_of(corpus_features[i]) for i in ids]
    loss_kind = model.config.loss_kind
    rng = np.random.default_rng(train_config.seed)
    params = {k: v.copy() for k, v in model.parameters().items()}
    grnn.set_parameters(model.network, params)
    state = grnn.AdamState.init(params, lr=train_config.lr)
    history = []
    last_good = {k: v.copy() for k, v in params.items()}

    for _epoch in range(train_config.epochs):
        order = rng.permutation(len(ids))
        epoch_loss = 0.0
        epoch_frames = 0
        for start in range(0, len(ids), train_config.batch_size):
            chosen = order[start:start + train_config.batch_size]
            batch = [frames[i] for i in chosen]
            batch_ids = [ids[i] for i in chosen]
            try:
                grads, loss, n_frames = grnn.bptt_gradients(
                    model.network, batch, loss_kind,
                    train_mode=True, rng=rng, ids=batch_ids)
            except NumericalError as exc:
                raise TrainingDiverged(str(exc),
                                       last_good_parameters=last_good,
                                       loss_history=history) from exc
            if train_config.clip_norm is not None:
                grads, _ = grnn.clip_gradients(grads, train_config.clip_norm)
            params, state = grnn.adam_update(params, grads, state)
            grnn.set_parameters(model.network, params)
            epoch_loss += loss
            epoch_frames += n_frames
        history.append(epoch_loss / epoch_frames)
        last_good = {k: v.copy() for k, v in params.items()}

    trained = TrainedModel(config=model.config, network=model.network,
                           seed=train_config.seed,
                           epochs=model.epochs + train_config.epochs,
                           final_loss=history[-1] if history else model.final_loss)
    return trained, history


# ---------------------------------------------------------------------------
# checkpoints: JSON with named row-major float64 parameter arrays


def save(model: TrainedModel, path) -> None:
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "kind": "model_checkpoint",
        "tool_version": __version__,
        "config": model.config.to_dict(),
        "seed": model.seed,
        "epochs": model.epochs,
        "final_loss": model.final_loss,
        "parameters": {k: v.tolist() for k, v in model.parameters().items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load(path) -> TrainedModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("kind") != "model_checkpoint":
        raise DataError(f"{path} is not a model checkpoint")
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise DataError(
            f"checkpoint version {doc.get('format_version')} not supported "
            f"(expected {CHECKPOINT_VERSION})")
    config = ModelConfig.from_dict(doc["config"])
    model = build(config, seed=int(doc.get("seed", 0)))
    stored = doc["parameters"]
    values = {}
    for key, current in model.parameters().items():
        if key not in stored:
            raise DataError(f"checkpoint {path} is missing parameter {key}")
        arr = np.asarray(stored[key], dtype=np.float64)
        if arr.shape != current.shape:
            raise DataError(
                f"checkpoint parameter {key} has shape {arr.shape}, "
                f"expected {current.shape}")
        values[key] = arr
    grnn.set_parameters(model.network, values)
    model.epochs = int(doc.get("epochs", 0))
    model.final_loss = doc.get("final_loss")
    return model
