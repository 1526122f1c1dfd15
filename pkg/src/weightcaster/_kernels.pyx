# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: rollout, adjoint and the per-ring objective.

Same call signatures and results (to rounding) as ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, fabs

cnp.import_array()


cdef inline double _softplus(double s) nogil:
    if s > 0:
        return s + log1p(exp(-s))
    return log1p(exp(s))


cdef inline double _sigmoid(double s) nogil:
    cdef double e
    if s >= 0:
        return 1.0 / (1.0 + exp(-s))
    e = exp(s)
    return e / (1.0 + e)


def rollout(phi, z1, Py_ssize_t horizon):
    cdef double[:, ::1] P = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[::1] z = np.ascontiguousarray(z1, dtype=np.float64)
    cdef Py_ssize_t S = z.shape[0]
    out = np.empty((horizon, S), dtype=np.float64)
    cdef double[:, ::1] st = out
    cdef Py_ssize_t t, i, j
    cdef double acc
    with nogil:
        for i in range(S):
            st[0, i] = z[i]
        for t in range(1, horizon):
            for i in range(S):
                acc = 0.0
                for j in range(S):
                    acc = acc + P[i, j] * st[t - 1, j]
                st[t, i] = acc
    return out


def rollout_adjoint(phi, states, state_grads):
    cdef double[:, ::1] P = np.ascontiguousarray(phi, dtype=np.float64)
    cdef double[:, ::1] st = np.ascontiguousarray(states, dtype=np.float64)
    cdef double[:, ::1] g = np.ascontiguousarray(state_grads, dtype=np.float64)
    cdef Py_ssize_t H = st.shape[0], S = st.shape[1]
    gphi_arr = np.zeros((S, S), dtype=np.float64)
    lam_arr = np.zeros(S, dtype=np.float64)
    nxt_arr = np.zeros(S, dtype=np.float64)
    cdef double[:, ::1] gphi = gphi_arr
    cdef double[::1] lam = lam_arr
    cdef double[::1] nxt = nxt_arr
    cdef Py_ssize_t t, i, j
    cdef double acc
    with nogil:
        for t in range(H - 1, -1, -1):
            # nxt = g_t + phi^T lam_{t+1}
            for j in range(S):
                acc = g[t, j]
                for i in range(S):
                    acc = acc + P[i, j] * lam[i]
                nxt[j] = acc
            for j in range(S):
                lam[j] = nxt[j]
            if t > 0:
                for i in range(S):
                    for j in range(S):
                        gphi[i, j] = gphi[i, j] + lam[i] * st[t - 1, j]
    return gphi_arr, lam_arr


def ring_objective(states, X, Y, ring, weight, Py_ssize_t theta_dim, bint stochastic,
                   double beta, double sigma_noise, double sigma_min):
    cdef double[:, ::1] st = np.ascontiguousarray(states, dtype=np.float64)
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef cnp.int64_t[::1] rg = np.ascontiguousarray(ring, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(weight, dtype=np.float64)
    cdef Py_ssize_t H = st.shape[0], S = st.shape[1]
    cdef Py_ssize_t N = x.shape[0], Dx = x.shape[1], Dy = y.shape[1]
    cdef Py_ssize_t n_slope = Dy * Dx
    data_arr = np.zeros(H, dtype=np.float64)
    kl_arr = np.zeros(H, dtype=np.float64)
    grads_arr = np.zeros((H, S), dtype=np.float64)
    cdef double[::1] data = data_arr
    cdef double[::1] kl = kl_arr
    cdef double[:, ::1] gr = grads_arr
    cdef Py_ssize_t n, k, j, t, c
    cdef double yhat, r, wn, coef, sq, var, klp, dv, sig, s, xj, noise2 = sigma_noise * sigma_noise
    with nogil:
        for n in range(N):
            t = rg[n]
            wn = w[n]
            sq = 0.0
            klp = 0.0
            for k in range(Dy):
                yhat = st[t, n_slope + k]
                for j in range(Dx):
                    yhat = yhat + st[t, k * Dx + j] * x[n, j]
                r = yhat - y[n, k]
                sq = sq + r * r
                coef = (2.0 / Dy) * wn * r
                if stochastic:
                    coef = coef + beta * wn * yhat
                    var = noise2
                    for j in range(Dx):
                        sig = _softplus(st[t, theta_dim + k * Dx + j]) + sigma_min
                        var = var + sig * sig * x[n, j] * x[n, j]
                    sig = _softplus(st[t, theta_dim + n_slope + k]) + sigma_min
                    var = var + sig * sig
                    klp = klp + 0.5 * (var + yhat * yhat - 1.0 - log(var))
                    dv = beta * wn * 0.5 * (1.0 - 1.0 / var)
                    for j in range(Dx):
                        c = k * Dx + j
                        s = st[t, theta_dim + c]
                        sig = _softplus(s) + sigma_min
                        xj = x[n, j]
                        gr[t, theta_dim + c] = gr[t, theta_dim + c] + dv * xj * xj * 2.0 * sig * _sigmoid(s)
                    c = n_slope + k
                    s = st[t, theta_dim + c]
                    sig = _softplus(s) + sigma_min
                    gr[t, theta_dim + c] = gr[t, theta_dim + c] + dv * 2.0 * sig * _sigmoid(s)
                for j in range(Dx):
                    gr[t, k * Dx + j] = gr[t, k * Dx + j] + coef * x[n, j]
                gr[t, n_slope + k] = gr[t, n_slope + k] + coef
            data[t] = data[t] + wn * sq / Dy
            if stochastic:
                kl[t] = kl[t] + wn * klp
    return data_arr, kl_arr, grads_arr
