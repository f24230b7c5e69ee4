"""Independent oracles used across the test suite.

Everything here is deliberately written without numpy vector tricks (and
without calling into gasseg internals) so it stays an independent check of
the production code paths.
"""

import math


def sig(a):
    return 1.0 / (1.0 + math.exp(-a))


def scalar_lstm_step(params, x, h_prev, c_prev):
    """Element-by-element LSTM update working on plain Python lists."""
    J = len(h_prev)
    D = len(x)

    def affine(w, u, b, j):
        s = b[j]
        for k in range(D):
            s += w[j][k] * x[k]
        for k in range(J):
            s += u[j][k] * h_prev[k]
        return s

    h, c, f_g, i_g, o_g = [], [], [], [], []
    for j in range(J):
        f = sig(affine(params.w_f, params.u_f, params.b_f, j))
        i = sig(affine(params.w_i, params.u_i, params.b_i, j))
        g = math.tanh(affine(params.w_c, params.u_c, params.b_c, j))
        cj = f * c_prev[j] + i * g
        o = sig(affine(params.w_o, params.u_o, params.b_o, j))
        h.append(o * math.tanh(cj))
        c.append(cj)
        f_g.append(f)
        i_g.append(i)
        o_g.append(o)
    return h, c, f_g, i_g, o_g


def scalar_gru_step(params, x, h_prev):
    """Element-by-element GRU update working on plain Python lists."""
    J = len(h_prev)
    D = len(x)

    def affine(w, u, b, j, hidden):
        s = b[j]
        for k in range(D):
            s += w[j][k] * x[k]
        for k in range(J):
            s += u[j][k] * hidden[k]
        return s

    z_g, r_g = [], []
    for j in range(J):
        z_g.append(sig(affine(params.w_z, params.u_z, params.b_z, j, h_prev)))
        r_g.append(sig(affine(params.w_r, params.u_r, params.b_r, j, h_prev)))
    gated = [r_g[k] * h_prev[k] for k in range(J)]
    h = []
    for j in range(J):
        g = math.tanh(affine(params.w_h, params.u_h, params.b_h, j, gated))
        h.append((1.0 - z_g[j]) * h_prev[j] + z_g[j] * g)
    return h, z_g, r_g


def brute_force_max_matching(ref, hyp, tolerance):
    """Optimal one-to-one matching size by exhaustive recursion."""

    def go(h_idx, available):
        if h_idx == len(hyp):
            return 0
        best = go(h_idx + 1, available)
        for k in list(available):
            if abs(ref[k] - hyp[h_idx]) <= tolerance:
                available.remove(k)
                best = max(best, 1 + go(h_idx + 1, available))
                available.add(k)
        return best

    return go(0, set(range(len(ref))))


def hac_greedy_oracle(frames, n_segments):
    """Quadratic re-computation of greedy contiguous Ward merging.

    Segments are lists of frame indices; every merge cost is recomputed from
    scratch as sse(union) - sse(a) - sse(b).
    """

    def sse(indices):
        dims = len(frames[0])
        n = len(indices)
        total = 0.0
        for d in range(dims):
            mean = sum(frames[i][d] for i in indices) / n
            total += sum((frames[i][d] - mean) ** 2 for i in indices)
        return total

    segments = [[i] for i in range(len(frames))]
    while len(segments) > n_segments:
        costs = [sse(segments[k] + segments[k + 1]) - sse(segments[k])
                 - sse(segments[k + 1]) for k in range(len(segments) - 1)]
        k = costs.index(min(costs))
        segments[k] = segments[k] + segments.pop(k + 1)
    return [seg[0] for seg in segments[1:]]  # boundary start frames


def naive_corpus_eval(refs, hyps, tolerance):
    """Recount pooled corpus metrics with the simplest possible code."""
    n_ref = sum(len(r) for r in refs.values())
    n_hyp = sum(len(h) for h in hyps.values())
    n_hit = 0
    for utt in refs:
        taken = set()
        for h in sorted(hyps[utt]):
            best, best_d = None, None
            for k, r in enumerate(refs[utt]):
                if k in taken:
                    continue
                d = abs(r - h)
                if d <= tolerance and (best_d is None or d < best_d):
                    best, best_d = k, d
            if best is not None:
                taken.add(best)
                n_hit += 1
    return n_ref, n_hyp, n_hit
