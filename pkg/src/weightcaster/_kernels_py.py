"""Pure-numpy implementations of the hot loops.

Signatures mirror ``_kernels.pyx`` exactly; :mod:`weightcaster.kernels`
picks whichever is importable.
"""

import numpy as np


def rollout(phi, z1, horizon):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    z1 = np.ascontiguousarray(z1, dtype=np.float64)
    S = z1.shape[0]
    states = np.empty((horizon, S))
    states[0] = z1
    for t in range(1, horizon):
        states[t] = phi @ states[t - 1]
    return states


def rollout_adjoint(phi, states, state_grads):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    H, S = states.shape
    lam = np.zeros(S)
    grad_phi = np.zeros((S, S))
    phi_t = phi.T
    for t in range(H - 1, -1, -1):
        lam = state_grads[t] + phi_t @ lam
        if t > 0:
            grad_phi += np.outer(lam, states[t - 1])
    return grad_phi, lam


def _softplus(s):
    return np.maximum(s, 0.0) + np.log1p(np.exp(-np.abs(s)))


def _sigmoid(s):
    e = np.exp(-np.abs(s))
    return np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def ring_objective(states, X, Y, ring, weight, theta_dim, stochastic,
                   beta, sigma_noise, sigma_min):
    """Per-ring data/KL terms and d(total)/d(state) for every rollout step.

    ``ring`` holds 0-based rollout rows, ``weight`` the per-point 1/B_t factor.
    Returns ``(data_per_ring, kl_per_ring, state_grads)``.
    """
    H, S = states.shape
    N, Dx = X.shape
    Dy = Y.shape[1]
    n_slope = Dy * Dx
    grads = np.zeros((H, S))
    data = np.zeros(H)
    kl = np.zeros(H)
    if N == 0:
        return data, kl, grads

    mu = states[ring, :theta_dim]
    slope = mu[:, :n_slope].reshape(N, Dy, Dx)
    inter = mu[:, n_slope:theta_dim]
    yhat = np.einsum("nkj,nj->nk", slope, X) + inter
    r = yhat - Y
    data_pt = weight * np.mean(r * r, axis=1)
    np.add.at(data, ring, data_pt)

    coef = (2.0 / Dy) * weight[:, None] * r  # d data / d yhat
    if stochastic:
        coef = coef + beta * weight[:, None] * yhat
    g_theta = np.empty((N, theta_dim))
    g_theta[:, :n_slope] = (coef[:, :, None] * X[:, None, :]).reshape(N, n_slope)
    g_theta[:, n_slope:] = coef

    if stochastic:
        s = states[ring, theta_dim:2 * theta_dim]
        sig = _softplus(s) + sigma_min
        sig2 = sig * sig
        x2 = X * X
        var = (np.einsum("nkj,nj->nk", sig2[:, :n_slope].reshape(N, Dy, Dx), x2)
               + sig2[:, n_slope:] + sigma_noise ** 2)
        kl_pt = 0.5 * np.sum(var + yhat * yhat - 1.0 - np.log(var), axis=1)
        np.add.at(kl, ring, weight * kl_pt)
        dv = beta * weight[:, None] * 0.5 * (1.0 - 1.0 / var)  # d total / d var
        jac2 = np.empty((N, theta_dim))
        jac2[:, :n_slope] = (dv[:, :, None] * x2[:, None, :]).reshape(N, n_slope)
        jac2[:, n_slope:] = dv
        g_s = jac2 * 2.0 * sig * _sigmoid(s)
        full = np.zeros((N, S))
        full[:, :theta_dim] = g_theta
        full[:, theta_dim:2 * theta_dim] = g_s
        np.add.at(grads, ring, full)
    else:
        np.add.at(grads[:, :theta_dim], ring, g_theta)
    return data, kl, grads
