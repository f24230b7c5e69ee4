"""Gated recurrent cells and training primitives, built from scratch.

The two cell types follow the standard formulations. LSTM:

    f_t = sigmoid(W_f x_t + U_f h_{t-1} + b_f)        forget gate
    i_t = sigmoid(W_i x_t + U_i h_{t-1} + b_i)        input gate
    g_t = tanh   (W_c x_t + U_c h_{t-1} + b_c)        cell candidate
    c_t = f_t * c_{t-1} + i_t * g_t
    o_t = sigmoid(W_o x_t + U_o h_{t-1} + b_o)        output gate
    h_t = o_t * tanh(c_t)

GRU:

    z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)        update gate
    r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)        reset gate
    g_t = tanh   (W_h x_t + U_h (r_t * h_{t-1}) + b_h)
    h_t = (1 - z_t) * h_{t-1} + z_t * g_t

Everything is float64 with explicit state: layers are parameter containers,
forward/backward are functions of (parameters, inputs), and the optimizer
state is passed in and returned. The time recursion runs on the kernel
backend selected in :mod:`gasseg.kernels`.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError


class GateTag(str, Enum):
    """Identifies one gate of one cell type."""

    LSTM_FORGET = "lstm_forget"
    LSTM_INPUT = "lstm_input"
    LSTM_OUTPUT = "lstm_output"
    GRU_UPDATE = "gru_update"
    GRU_RESET = "gru_reset"

    @property
    def cell(self) -> str:
        return "lstm" if self.value.startswith("lstm") else "gru"

    @property
    def short(self) -> str:
        return self.value.split("_", 1)[1]

    @classmethod
    def for_cell(cls, cell: str) -> frozenset["GateTag"]:
        return frozenset(tag for tag in cls if tag.cell == cell)

    @classmethod
    def from_short(cls, cell: str, name: str) -> "GateTag":
        for tag in cls.for_cell(cell):
            if tag.short == name:
                return tag
        raise ConfigError(
            f"gate not available: no {name!r} gate in a {cell} cell")


ALL_GATES = frozenset(GateTag)


def _as_f64(a, name):
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {name}")
    return arr


@dataclass
class GateTrace:
    """Activation history of one gate across a sequence: values[t, j]."""

    gate: GateTag
    layer_index: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("gate trace must be a T x J matrix")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("non-finite gate activations")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise ValueError("gate activations must lie in [0, 1]")


# ---------------------------------------------------------------------------
# cell parameters and single-step evaluation


@dataclass
class LstmParams:
    w_f: np.ndarray
    w_i: np.ndarray
    w_o: np.ndarray
    w_c: np.ndarray
    u_f: np.ndarray
    u_i: np.ndarray
    u_o: np.ndarray
    u_c: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    # stacked gate-block order used by the kernels
    FIELDS = ("w_f", "w_i", "w_o", "w_c",
              "u_f", "u_i", "u_o", "u_c",
              "b_f", "b_i", "b_o", "b_c")
    _ORDER = ("f", "i", "o", "c")

    @property
    def n_units(self) -> int:
        return self.w_f.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_f.shape[1]

    def stacked(self):
        wx = np.vstack([self.w_f, self.w_i, self.w_o, self.w_c])
        wh = np.vstack([self.u_f, self.u_i, self.u_o, self.u_c])
        b = np.concatenate([self.b_f, self.b_i, self.b_o, self.b_c])
        return wx, wh, b

    @classmethod
    def from_stacked(cls, wx, wh, b):
        j = wh.shape[1]
        blocks = {}
        for k, gate in enumerate(cls._ORDER):
            blocks["w_" + gate] = wx[k * j:(k + 1) * j].copy()
            blocks["u_" + gate] = wh[k * j:(k + 1) * j].copy()
            blocks["b_" + gate] = b[k * j:(k + 1) * j].copy()
        return cls(**blocks)


@dataclass
class GruParams:
    w_z: np.ndarray
    w_r: np.ndarray
    w_h: np.ndarray
    u_z: np.ndarray
    u_r: np.ndarray
    u_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray

    FIELDS = ("w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h")
    _ORDER = ("z", "r", "h")

    @property
    def n_units(self) -> int:
        return self.w_z.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_z.shape[1]

    def stacked(self):
        wx = np.vstack([self.w_z, self.w_r, self.w_h])
        wh = np.vstack([self.u_z, self.u_r, self.u_h])
        b = np.concatenate([self.b_z, self.b_r, self.b_h])
        return wx, wh, b

    @classmethod
    def from_stacked(cls, wx, wh, b):
        j = wh.shape[1]
        blocks = {}
        for k, gate in enumerate(cls._ORDER):
            blocks["w_" + gate] = wx[k * j:(k + 1) * j].copy()
            blocks["u_" + gate] = wh[k * j:(k + 1) * j].copy()
            blocks["b_" + gate] = b[k * j:(k + 1) * j].copy()
        return cls(**blocks)


def init_lstm_params(n_units, input_dim, rng, scale=0.08):
    """Uniform(-scale, scale) weights, zero biases. Draw order is fixed so a
    seeded rng reproduces parameters exactly."""
    def w():
        return rng.uniform(-scale, scale, size=(n_units, input_dim))

    def u():
        return rng.uniform(-scale, scale, size=(n_units, n_units))

    z = np.zeros(n_units)
    return LstmParams(w_f=w(), w_i=w(), w_o=w(), w_c=w(),
                      u_f=u(), u_i=u(), u_o=u(), u_c=u(),
                      b_f=z.copy(), b_i=z.copy(), b_o=z.copy(), b_c=z.copy())


def init_gru_params(n_units, input_dim, rng, scale=0.08):
    def w():
        return rng.uniform(-scale, scale, size=(n_units, input_dim))

    def u():
        return rng.uniform(-scale, scale, size=(n_units, n_units))

    z = np.zeros(n_units)
    return GruParams(w_z=w(), w_r=w(), w_h=w(),
                     u_z=u(), u_r=u(), u_h=u(),
                     b_z=z.copy(), b_r=z.copy(), b_h=z.copy())


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def _check_vec(v, dim, name):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericalError(f"non-finite values in {name}")
    return v


def lstm_step(params: LstmParams, x_t, h_prev, c_prev):
    """One LSTM update. Returns (h_t, c_t, gates) with gates keyed by
    'forget', 'input', 'output'."""
    d, j = params.input_dim, params.n_units
    x_t = _check_vec(x_t, d, "x_t")
    h_prev = _check_vec(h_prev, j, "h_prev")
    c_prev = _check_vec(c_prev, j, "c_prev")
    f = _sigmoid(params.w_f @ x_t + params.u_f @ h_prev + params.b_f)
    i = _sigmoid(params.w_i @ x_t + params.u_i @ h_prev + params.b_i)
    g = np.tanh(params.w_c @ x_t + params.u_c @ h_prev + params.b_c)
    c_t = f * c_prev + i * g
    o = _sigmoid(params.w_o @ x_t + params.u_o @ h_prev + params.b_o)
    h_t = o * np.tanh(c_t)
    return h_t, c_t, {"forget": f, "input": i, "output": o}


def gru_step(params: GruParams, x_t, h_prev):
    """One GRU update. Returns (h_t, gates) with gates keyed by 'update',
    'reset'."""
    d, j = params.input_dim, params.n_units
    x_t = _check_vec(x_t, d, "x_t")
    h_prev = _check_vec(h_prev, j, "h_prev")
    z = _sigmoid(params.w_z @ x_t + params.u_z @ h_prev + params.b_z)
    r = _sigmoid(params.w_r @ x_t + params.u_r @ h_prev + params.b_r)
    g = np.tanh(params.w_h @ x_t + params.u_h @ (r * h_prev) + params.b_h)
    h_t = (1.0 - z) * h_prev + z * g
    return h_t, {"update": z, "reset": r}


# ---------------------------------------------------------------------------
# dropout


def dropout_mask(shape, rate, rng):
    """Inverted-dropout mask: zeros with probability ``rate``, survivors
    scaled by 1/(1-rate) so the masked expectation is unchanged."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


# ---------------------------------------------------------------------------
# layers


class FeedForwardLayer:
    """Fully-connected ReLU layer; inverted dropout on its output while
    training."""

    kind = "feedforward"

    def __init__(self, w, b, dropout_rate=0.0):
        self.w = _as_f64(w, "w")
        self.b = _as_f64(b, "b")
        self.dropout_rate = float(dropout_rate)

    @property
    def input_dim(self):
        return self.w.shape[1]

    @property
    def output_dim(self):
        return self.w.shape[0]

    def param_items(self):
        return [("w", self.w), ("b", self.b)]

    def set_params(self, items):
        self.w = _as_f64(items["w"], "w")
        self.b = _as_f64(items["b"], "b")

    def forward(self, x, train_mode=False, rng=None):
        pre = x @ self.w.T + self.b
        y = np.maximum(pre, 0.0)
        mask = None
        if train_mode and self.dropout_rate > 0.0:
            if rng is None:
                raise ConfigError("training forward pass needs an rng for dropout")
            mask = dropout_mask(y.shape, self.dropout_rate, rng)
            y = y * mask
        return y, (x, pre > 0.0, mask)

    def backward(self, cache, dy):
        x, active, mask = cache
        if mask is not None:
            dy = dy * mask
        dpre = dy * active
        grads = {"w": dpre.T @ x, "b": dpre.sum(axis=0)}
        return dpre @ self.w, grads


class LinearLayer:
    """Affine readout layer."""

    kind = "linear"

    def __init__(self, w, b):
        self.w = _as_f64(w, "w")
        self.b = _as_f64(b, "b")

    @property
    def input_dim(self):
        return self.w.shape[1]

    @property
    def output_dim(self):
        return self.w.shape[0]

    def param_items(self):
        return [("w", self.w), ("b", self.b)]

    def set_params(self, items):
        self.w = _as_f64(items["w"], "w")
        self.b = _as_f64(items["b"], "b")

    def forward(self, x, train_mode=False, rng=None):
        return x @ self.w.T + self.b, x

    def backward(self, cache, dy):
        x = cache
        grads = {"w": dy.T @ x, "b": dy.sum(axis=0)}
        return dy @ self.w, grads


class RecurrentLayer:
    """A full LSTM or GRU layer run over whole sequences via the kernel
    backend. Initial hidden (and cell) state is zero."""

    kind = "recurrent"

    def __init__(self, cell, params):
        if cell not in ("lstm", "gru"):
            raise ConfigError(f"unknown cell type {cell!r}")
        expected = LstmParams if cell == "lstm" else GruParams
        if not isinstance(params, expected):
            raise ConfigError(f"{cell} layer needs {expected.__name__}")
        self.cell = cell
        self.params = params

    @property
    def input_dim(self):
        return self.params.input_dim

    @property
    def output_dim(self):
        return self.params.n_units

    def param_items(self):
        return [(name, getattr(self.params, name))
                for name in type(self.params).FIELDS]

    def set_params(self, items):
        for name in type(self.params).FIELDS:
            setattr(self.params, name, _as_f64(items[name], name))

    def forward(self, x, train_mode=False, rng=None):
        j = self.params.n_units
        wx, wh, b = self.params.stacked()
        x = np.ascontiguousarray(x)
        h0 = np.zeros(j)
        if self.cell == "lstm":
            c0 = np.zeros(j)
            h, c, f, i, o, g = kernels.lstm_forward(x, wx, wh, b, h0, c0)
            gates = {GateTag.LSTM_FORGET: f, GateTag.LSTM_INPUT: i,
                     GateTag.LSTM_OUTPUT: o}
            cache = (x, wx, wh, h, c, f, i, o, g, h0, c0)
        else:
            h, z, r, g = kernels.gru_forward(x, wx, wh, b, h0)
            gates = {GateTag.GRU_UPDATE: z, GateTag.GRU_RESET: r}
            cache = (x, wx, wh, h, z, r, g, h0)
        if not np.all(np.isfinite(h)):
            raise NumericalError("non-finite hidden state in recurrent layer")
        return h, (cache, gates)

    def backward(self, cache, dy):
        cache, _gates = cache
        dy = np.ascontiguousarray(dy)
        if self.cell == "lstm":
            x, wx, wh, h, c, f, i, o, g, h0, c0 = cache
            dx, dwx, dwh, db = kernels.lstm_backward(
                x, wx, wh, h, c, f, i, o, g, dy, h0, c0)
            grads_stacked = type(self.params).from_stacked(dwx, dwh, db)
        else:
            x, wx, wh, h, z, r, g, h0 = cache
            dx, dwx, dwh, db = kernels.gru_backward(
                x, wx, wh, h, z, r, g, dy, h0)
            grads_stacked = type(self.params).from_stacked(dwx, dwh, db)
        grads = {name: getattr(grads_stacked, name)
                 for name in type(self.params).FIELDS}
        return dx, grads

    def gate_matrices(self, cache):
        """Gate activation matrices captured during forward, keyed by tag."""
        return cache[1]


@dataclass
class Network:
    """An ordered stack of named layers mapping (T, input_dim) sequences to
    (T, output_dim) sequences. Strictly causal: information only flows
    forward in time through the recurrent layers."""

    layer_names: list
    layers: list

    @property
    def input_dim(self):
        return self.layers[0].input_dim

    @property
    def output_dim(self):
        return self.layers[-1].output_dim

    @property
    def cell(self):
        for layer in self.layers:
            if layer.kind == "recurrent":
                return layer.cell
        return None

    def recurrent_layers(self):
        return [layer for layer in self.layers if layer.kind == "recurrent"]


def parameters(network: Network) -> "OrderedDict[str, np.ndarray]":
    """Flat name -> array view of every trainable parameter."""
    out = OrderedDict()
    for name, layer in zip(network.layer_names, network.layers):
        for local, arr in layer.param_items():
            out[f"{name}.{local}"] = arr
    return out


def set_parameters(network: Network, values) -> None:
    for name, layer in zip(network.layer_names, network.layers):
        local = {}
        for local_name, _ in layer.param_items():
            key = f"{name}.{local_name}"
            if key not in values:
                raise ConfigError(f"missing parameter {key}")
            local[local_name] = values[key]
        layer.set_params(local)


def _valid_tags(network: Network) -> frozenset:
    tags = frozenset()
    for layer in network.recurrent_layers():
        tags |= GateTag.for_cell(layer.cell)
    return tags


def forward_sequence(network: Network, features, capture=frozenset(),
                     train_mode=False, rng=None):
    """Run a (T, D) feature sequence through the network.

    Returns (outputs, traces): outputs is (T, output_dim); traces holds one
    GateTrace per requested tag per recurrent layer, layer_index counting
    recurrent layers from the input side.
    """
    capture = frozenset(capture)
    invalid = capture - _valid_tags(network)
    if invalid:
        names = ", ".join(sorted(t.value for t in invalid))
        raise ConfigError(f"gate not available in this network: {names}")
    y, caches = _forward_caches(network, features, train_mode, rng)
    traces = _collect_traces(network, caches, capture)
    return y, traces


def _forward_caches(network, features, train_mode=False, rng=None):
    x = _as_f64(features, "features")
    if x.ndim != 2 or x.shape[1] != network.input_dim:
        raise ValueError(
            f"expected (T, {network.input_dim}) input, got {x.shape}")
    caches = []
    for layer in network.layers:
        x, cache = layer.forward(x, train_mode=train_mode, rng=rng)
        caches.append(cache)
    return x, caches


def _collect_traces(network, caches, capture):
    traces = []
    if not capture:
        return traces
    rec_index = 0
    for layer, cache in zip(network.layers, caches):
        if layer.kind != "recurrent":
            continue
        for tag, values in layer.gate_matrices(cache).items():
            if tag in capture:
                traces.append(GateTrace(gate=tag, layer_index=rec_index,
                                        values=values))
        rec_index += 1
    return traces


def _backward(network, caches, d_out):
    grads = OrderedDict()
    dy = d_out
    for name, layer, cache in zip(reversed(network.layer_names),
                                  reversed(network.layers),
                                  reversed(caches)):
        dy, layer_grads = layer.backward(cache, dy)
        for local, g in layer_grads.items():
            grads[f"{name}.{local}"] = g
    ordered = OrderedDict()
    for key in parameters(network):
        ordered[key] = grads[key]
    return ordered, dy


LOSS_KINDS = ("reconstruction", "prediction")


def bptt_gradients(network: Network, batch, loss_kind, train_mode=False,
                   rng=None, ids=None):
    """Exact loss gradients for a batch of variable-length sequences.

    ``batch`` is a sequence of (T, D) arrays; the batch loss is the sum of
    per-utterance losses, each summing (1/D)*||error_t||^2 over frames
    (reconstruction) or frame transitions (prediction). Returns
    (gradients, loss, frame_count) where frame_count is the number of summed
    error terms, for per-frame averaging.
    """
    if loss_kind not in LOSS_KINDS:
        raise ConfigError(f"unknown loss kind {loss_kind!r}")
    if len(batch) == 0:
        raise ValueError("empty batch")
    ids = ids if ids is not None else [f"utt{i}" for i in range(len(batch))]
    total = OrderedDict((k, np.zeros_like(v))
                        for k, v in parameters(network).items())
    loss = 0.0
    frames = 0
    d = network.output_dim
    for utt_id, x in zip(ids, batch):
        x = _as_f64(x, f"features[{utt_id}]")
        y, caches = _forward_caches(network, x, train_mode, rng)
        if loss_kind == "reconstruction":
            err = y - x
            n_terms = x.shape[0]
        else:
            if x.shape[0] < 2:
                raise ValueError(
                    f"prediction loss needs T >= 2 ({utt_id} has {x.shape[0]})")
            err = np.zeros_like(y)
            err[:-1] = y[:-1] - x[1:]
            n_terms = x.shape[0] - 1
        with np.errstate(over="ignore", invalid="ignore"):
            utt_loss = float((err * err).sum() / d)
        if not np.isfinite(utt_loss):
            raise NumericalError(f"non-finite loss on utterance {utt_id}")
        loss += utt_loss
        frames += n_terms
        grads, _ = _backward(network, caches, (2.0 / d) * err)
        for k, g in grads.items():
            total[k] += g
    return total, loss, frames


def clip_gradients(grads, max_norm):
    """Scale the whole gradient set so its global L2 norm is <= max_norm."""
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm > 0.0:
        scale = max_norm / total
        return OrderedDict((k, g * scale) for k, g in grads.items()), total
    return grads, total


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters."""

    m: "OrderedDict[str, np.ndarray]"
    v: "OrderedDict[str, np.ndarray]"
    step_count: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def init(cls, params, lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        m = OrderedDict((k, np.zeros_like(p)) for k, p in params.items())
        v = OrderedDict((k, np.zeros_like(p)) for k, p in params.items())
        return cls(m=m, v=v, step_count=0, lr=lr, beta1=beta1, beta2=beta2,
                   epsilon=epsilon)


def adam_update(params, grads, state: AdamState):
    """One bias-corrected Adam step. Pure: returns (new_params, new_state)."""
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    new_params = OrderedDict()
    new_m = OrderedDict()
    new_v = OrderedDict()
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape mismatch for {key}")
        m = b1 * state.m[key] + (1.0 - b1) * g
        v = b2 * state.v[key] + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_params[key] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[key] = m
        new_v[key] = v
    new_state = AdamState(m=new_m, v=new_v, step_count=t, lr=state.lr,
                          beta1=b1, beta2=b2, epsilon=state.epsilon)
    return new_params, new_state
