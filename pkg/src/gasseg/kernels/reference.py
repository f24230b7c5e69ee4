"""Pure-numpy recurrent sequence kernels.

This is the fallback backend used when the compiled extension is missing,
and the semantic reference the compiled kernels are tested against.

Conventions shared by both backends:
  * float64 everywhere;
  * stacked gate blocks along the first weight axis,
    LSTM order [forget, input, output, candidate], GRU order
    [update, reset, candidate];
  * ``wx`` has shape (n_gates*J, D), ``wh`` (n_gates*J, J), ``b`` (n_gates*J,);
  * sequences are (T, D) row-major, hidden histories (T, J);
  * backward takes ``d_h``, the loss gradient w.r.t. every hidden state
    (contributions from upper layers), and returns gradients w.r.t. the
    inputs and the stacked parameters.

Only the time recursion lives here; input projections are batched matmuls.
"""

import numpy as np


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def lstm_forward(x, wx, wh, b, h0, c0):
    """Run an LSTM over a (T, D) sequence.

    Returns (h, c, f, i, o, g): hidden states, cell states, forget/input/
    output gate activations and the tanh cell candidate, each (T, J).
    """
    T = x.shape[0]
    J = wh.shape[1]
    xw = x @ wx.T + b                     # (T, 4J), input projections batched
    h = np.empty((T, J))
    c = np.empty((T, J))
    f = np.empty((T, J))
    i = np.empty((T, J))
    o = np.empty((T, J))
    g = np.empty((T, J))
    hp, cp = h0, c0
    for t in range(T):
        a = xw[t] + hp @ wh.T
        f[t] = _sigmoid(a[:J])
        i[t] = _sigmoid(a[J:2 * J])
        o[t] = _sigmoid(a[2 * J:3 * J])
        g[t] = np.tanh(a[3 * J:])
        c[t] = f[t] * cp + i[t] * g[t]
        h[t] = o[t] * np.tanh(c[t])
        hp, cp = h[t], c[t]
    return h, c, f, i, o, g


def lstm_backward(x, wx, wh, h, c, f, i, o, g, d_h, h0, c0):
    """Backpropagate through time for :func:`lstm_forward`.

    Returns (dx, dwx, dwh, db).
    """
    T = x.shape[0]
    J = wh.shape[1]
    da = np.empty((T, 4 * J))             # pre-activation grads per step
    dh_next = np.zeros(J)
    dc_next = np.zeros(J)
    for t in range(T - 1, -1, -1):
        hp = h[t - 1] if t > 0 else h0
        cp = c[t - 1] if t > 0 else c0
        dht = d_h[t] + dh_next
        tc = np.tanh(c[t])
        do = dht * tc
        dc = dht * o[t] * (1.0 - tc * tc) + dc_next
        df = dc * cp
        di = dc * g[t]
        dg = dc * i[t]
        dc_next = dc * f[t]
        row = da[t]
        row[:J] = df * f[t] * (1.0 - f[t])
        row[J:2 * J] = di * i[t] * (1.0 - i[t])
        row[2 * J:3 * J] = do * o[t] * (1.0 - o[t])
        row[3 * J:] = dg * (1.0 - g[t] * g[t])
        dh_next = row @ wh
    h_prev = np.vstack([h0, h[:-1]])
    dwx = da.T @ x
    dwh = da.T @ h_prev
    db = da.sum(axis=0)
    dx = da @ wx
    return dx, dwx, dwh, db


def gru_forward(x, wx, wh, b, h0):
    """Run a GRU over a (T, D) sequence.

    Returns (h, z, r, hc): hidden states, update gate, reset gate and the
    tanh candidate state, each (T, J).
    """
    T = x.shape[0]
    J = wh.shape[1]
    xw = x @ wx.T + b                     # (T, 3J)
    wh_z = wh[:J]
    wh_r = wh[J:2 * J]
    wh_c = wh[2 * J:]
    h = np.empty((T, J))
    z = np.empty((T, J))
    r = np.empty((T, J))
    hc = np.empty((T, J))
    hp = h0
    for t in range(T):
        z[t] = _sigmoid(xw[t, :J] + hp @ wh_z.T)
        r[t] = _sigmoid(xw[t, J:2 * J] + hp @ wh_r.T)
        hc[t] = np.tanh(xw[t, 2 * J:] + (r[t] * hp) @ wh_c.T)
        h[t] = (1.0 - z[t]) * hp + z[t] * hc[t]
        hp = h[t]
    return h, z, r, hc


def gru_backward(x, wx, wh, h, z, r, hc, d_h, h0):
    """Backpropagate through time for :func:`gru_forward`.

    Returns (dx, dwx, dwh, db).
    """
    T = x.shape[0]
    J = wh.shape[1]
    wh_z = wh[:J]
    wh_r = wh[J:2 * J]
    wh_c = wh[2 * J:]
    da = np.empty((T, 3 * J))
    dh_next = np.zeros(J)
    for t in range(T - 1, -1, -1):
        hp = h[t - 1] if t > 0 else h0
        dht = d_h[t] + dh_next
        dz = dht * (hc[t] - hp)
        dac = dht * z[t] * (1.0 - hc[t] * hc[t])
        ug = dac @ wh_c                   # gradient reaching r[t] * h_prev
        dr = ug * hp
        daz = dz * z[t] * (1.0 - z[t])
        dar = dr * r[t] * (1.0 - r[t])
        da[t, :J] = daz
        da[t, J:2 * J] = dar
        da[t, 2 * J:] = dac
        dh_next = dht * (1.0 - z[t]) + daz @ wh_z + dar @ wh_r + ug * r[t]
    h_prev = np.vstack([h0, h[:-1]])
    dwx = da.T @ x
    db = da.sum(axis=0)
    dx = da @ wx
    dwh = np.empty_like(wh)
    dwh[:J] = da[:, :J].T @ h_prev
    dwh[J:2 * J] = da[:, J:2 * J].T @ h_prev
    dwh[2 * J:] = da[:, 2 * J:].T @ (r * h_prev)
    return dx, dwx, dwh, db
