# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled recurrent sequence kernels.

Drop-in replacement for :mod:`gasseg.kernels.reference`; same signatures,
same gate-block conventions, C loops instead of per-step numpy calls.
"""

from libc.math cimport exp, tanh

import numpy as np


cdef inline double _sig(double a) noexcept nogil:
    return 1.0 / (1.0 + exp(-a))


def lstm_forward(double[:, ::1] x, double[:, ::1] wx, double[:, ::1] wh,
                 double[::1] b, double[::1] h0, double[::1] c0):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t D = x.shape[1]
    cdef Py_ssize_t J = wh.shape[1]
    cdef Py_ssize_t G = 4 * J
    cdef Py_ssize_t t, gj, j, k

    h_arr = np.empty((T, J))
    c_arr = np.empty((T, J))
    f_arr = np.empty((T, J))
    i_arr = np.empty((T, J))
    o_arr = np.empty((T, J))
    g_arr = np.empty((T, J))
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] c = c_arr
    cdef double[:, ::1] f = f_arr
    cdef double[:, ::1] i_ = i_arr
    cdef double[:, ::1] o = o_arr
    cdef double[:, ::1] g = g_arr
    cdef double[::1] a = np.empty(G)
    cdef double[::1] hp = np.array(h0, copy=True)
    cdef double[::1] cp = np.array(c0, copy=True)
    cdef double s

    with nogil:
        for t in range(T):
            for gj in range(G):
                s = b[gj]
                for k in range(D):
                    s += wx[gj, k] * x[t, k]
                for k in range(J):
                    s += wh[gj, k] * hp[k]
                a[gj] = s
            for j in range(J):
                f[t, j] = _sig(a[j])
                i_[t, j] = _sig(a[J + j])
                o[t, j] = _sig(a[2 * J + j])
                g[t, j] = tanh(a[3 * J + j])
                c[t, j] = f[t, j] * cp[j] + i_[t, j] * g[t, j]
                h[t, j] = o[t, j] * tanh(c[t, j])
            for j in range(J):
                hp[j] = h[t, j]
                cp[j] = c[t, j]
    return h_arr, c_arr, f_arr, i_arr, o_arr, g_arr


def lstm_backward(double[:, ::1] x, double[:, ::1] wx, double[:, ::1] wh,
                  double[:, ::1] h, double[:, ::1] c,
                  double[:, ::1] f, double[:, ::1] i_, double[:, ::1] o,
                  double[:, ::1] g, double[:, ::1] d_h,
                  double[::1] h0, double[::1] c0):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t D = x.shape[1]
    cdef Py_ssize_t J = wh.shape[1]
    cdef Py_ssize_t G = 4 * J
    cdef Py_ssize_t t, gj, j, k

    dx_arr = np.zeros((T, D))
    dwx_arr = np.zeros((G, D))
    dwh_arr = np.zeros((G, J))
    db_arr = np.zeros(G)
    cdef double[:, ::1] dx = dx_arr
    cdef double[:, ::1] dwx = dwx_arr
    cdef double[:, ::1] dwh = dwh_arr
    cdef double[::1] db = db_arr
    cdef double[::1] da = np.empty(G)
    cdef double[::1] dh_next = np.zeros(J)
    cdef double[::1] dc_next = np.zeros(J)
    cdef double[::1] hp = np.empty(J)
    cdef double[::1] cp = np.empty(J)
    cdef double dht, tc, do, dc, s

    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(J):
                if t > 0:
                    hp[j] = h[t - 1, j]
                    cp[j] = c[t - 1, j]
                else:
                    hp[j] = h0[j]
                    cp[j] = c0[j]
            for j in range(J):
                dht = d_h[t, j] + dh_next[j]
                tc = tanh(c[t, j])
                do = dht * tc
                dc = dht * o[t, j] * (1.0 - tc * tc) + dc_next[j]
                da[j] = dc * cp[j] * f[t, j] * (1.0 - f[t, j])
                da[J + j] = dc * g[t, j] * i_[t, j] * (1.0 - i_[t, j])
                da[2 * J + j] = do * o[t, j] * (1.0 - o[t, j])
                da[3 * J + j] = dc * i_[t, j] * (1.0 - g[t, j] * g[t, j])
                dc_next[j] = dc * f[t, j]
            for k in range(J):
                s = 0.0
                for gj in range(G):
                    s += da[gj] * wh[gj, k]
                dh_next[k] = s
            for gj in range(G):
                db[gj] += da[gj]
                for k in range(D):
                    dwx[gj, k] += da[gj] * x[t, k]
                for k in range(J):
                    dwh[gj, k] += da[gj] * hp[k]
            for k in range(D):
                s = 0.0
                for gj in range(G):
                    s += da[gj] * wx[gj, k]
                dx[t, k] = s
    return dx_arr, dwx_arr, dwh_arr, db_arr


def gru_forward(double[:, ::1] x, double[:, ::1] wx, double[:, ::1] wh,
                double[::1] b, double[::1] h0):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t D = x.shape[1]
    cdef Py_ssize_t J = wh.shape[1]
    cdef Py_ssize_t G = 3 * J
    cdef Py_ssize_t t, gj, j, k

    h_arr = np.empty((T, J))
    z_arr = np.empty((T, J))
    r_arr = np.empty((T, J))
    hc_arr = np.empty((T, J))
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] r = r_arr
    cdef double[:, ::1] hc = hc_arr
    cdef double[::1] a = np.empty(G)
    cdef double[::1] hp = np.array(h0, copy=True)
    cdef double s

    with nogil:
        for t in range(T):
            for gj in range(2 * J):
                s = b[gj]
                for k in range(D):
                    s += wx[gj, k] * x[t, k]
                for k in range(J):
                    s += wh[gj, k] * hp[k]
                a[gj] = s
            for j in range(J):
                z[t, j] = _sig(a[j])
                r[t, j] = _sig(a[J + j])
            for j in range(J):
                gj = 2 * J + j
                s = b[gj]
                for k in range(D):
                    s += wx[gj, k] * x[t, k]
                for k in range(J):
                    s += wh[gj, k] * (r[t, k] * hp[k])
                hc[t, j] = tanh(s)
                h[t, j] = (1.0 - z[t, j]) * hp[j] + z[t, j] * hc[t, j]
            for j in range(J):
                hp[j] = h[t, j]
    return h_arr, z_arr, r_arr, hc_arr


def gru_backward(double[:, ::1] x, double[:, ::1] wx, double[:, ::1] wh,
                 double[:, ::1] h, double[:, ::1] z, double[:, ::1] r,
                 double[:, ::1] hc, double[:, ::1] d_h, double[::1] h0):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t D = x.shape[1]
    cdef Py_ssize_t J = wh.shape[1]
    cdef Py_ssize_t G = 3 * J
    cdef Py_ssize_t t, gj, j, k

    dx_arr = np.zeros((T, D))
    dwx_arr = np.zeros((G, D))
    dwh_arr = np.zeros((G, J))
    db_arr = np.zeros(G)
    cdef double[:, ::1] dx = dx_arr
    cdef double[:, ::1] dwx = dwx_arr
    cdef double[:, ::1] dwh = dwh_arr
    cdef double[::1] db = db_arr
    cdef double[::1] da = np.empty(G)
    cdef double[::1] dh_next = np.zeros(J)
    cdef double[::1] hp = np.empty(J)
    cdef double[::1] dht = np.empty(J)
    cdef double[::1] ug = np.empty(J)
    cdef double s, dz, dac, dr

    with nogil:
        for t in range(T - 1, -1, -1):
            for j in range(J):
                hp[j] = h[t - 1, j] if t > 0 else h0[j]
                dht[j] = d_h[t, j] + dh_next[j]
            for j in range(J):
                dac = dht[j] * z[t, j] * (1.0 - hc[t, j] * hc[t, j])
                da[2 * J + j] = dac
            # gradient reaching the gated state r[t] * h_prev
            for k in range(J):
                s = 0.0
                for j in range(J):
                    s += da[2 * J + j] * wh[2 * J + j, k]
                ug[k] = s
            for j in range(J):
                dz = dht[j] * (hc[t, j] - hp[j])
                da[j] = dz * z[t, j] * (1.0 - z[t, j])
                dr = ug[j] * hp[j]
                da[J + j] = dr * r[t, j] * (1.0 - r[t, j])
            for k in range(J):
                s = dht[k] * (1.0 - z[t, k]) + ug[k] * r[t, k]
                for j in range(J):
                    s += da[j] * wh[j, k] + da[J + j] * wh[J + j, k]
                dh_next[k] = s
            for gj in range(G):
                db[gj] += da[gj]
                for k in range(D):
                    dwx[gj, k] += da[gj] * x[t, k]
            for j in range(J):
                for k in range(J):
                    dwh[j, k] += da[j] * hp[k]
                    dwh[J + j, k] += da[J + j] * hp[k]
                    dwh[2 * J + j, k] += da[2 * J + j] * (r[t, k] * hp[k])
            for k in range(D):
                s = 0.0
                for gj in range(G):
                    s += da[gj] * wx[gj, k]
                dx[t, k] = s
    return dx_arr, dwx_arr, dwh_arr, db_arr
