"""Independent reference implementations used as test oracles.

Everything here is written with Python loops and the math module, sharing no
code with the package, so agreement is evidence rather than tautology.
"""

import math

import numpy as np


def naive_matvec(A, v):
    n = len(v)
    return [sum(A[i][k] * v[k] for k in range(n)) for i in range(len(A))]


def naive_states(phi, z1, horizon):
    """z_t = phi^{t-1} z_1 by repeated naive matrix-vector products."""
    phi = [list(map(float, row)) for row in np.asarray(phi)]
    z = list(map(float, z1))
    out = [z]
    for _ in range(horizon - 1):
        z = naive_matvec(phi, z)
        out.append(z)
    return out


def naive_matpow_states(phi, z1, horizon):
    """Same trajectory via explicit powers phi^{t-1} (naive matrix-matrix products)."""
    A = [list(map(float, row)) for row in np.asarray(phi)]
    n = len(A)
    P = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    out = []
    for _ in range(horizon):
        out.append(naive_matvec(P, list(map(float, z1))))
        P = [[sum(A[i][k] * P[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return out


def softplus(s):
    return max(s, 0.0) + math.log1p(math.exp(-abs(s)))


def linear_predict(theta, x, dy):
    dx = len(x)
    return [sum(theta[k * dx + j] * x[j] for j in range(dx)) + theta[dy * dx + k] for k in range(dy)]


def ring_loss(phi, z1, X, Y, rings, theta_dim, stochastic=False, beta=0.0, sigma_noise=0.0,
              sigma_min=1e-4):
    """Sum over non-empty rings of the in-ring mean squared error (mean over
    points and output dims), plus beta times the in-ring mean output KL."""
    X = np.asarray(X, dtype=float).reshape(len(rings), -1)
    Y = np.asarray(Y, dtype=float).reshape(len(rings), -1)
    dy = Y.shape[1]
    dx = X.shape[1]
    H = max(rings)
    states = naive_states(phi, z1, H)
    groups = {}
    for i, t in enumerate(rings):
        groups.setdefault(int(t), []).append(i)
    data = kl = 0.0
    for t, idx in sorted(groups.items()):
        z = states[t - 1]
        mu = z[:theta_dim]
        d_ring = k_ring = 0.0
        for i in idx:
            x, y = list(X[i]), list(Y[i])
            yh = linear_predict(mu, x, dy)
            d_ring += sum((a - b) ** 2 for a, b in zip(yh, y)) / dy
            if stochastic:
                sig = [softplus(s) + sigma_min for s in z[theta_dim:2 * theta_dim]]
                for k in range(dy):
                    v = sum(x[j] ** 2 * sig[k * dx + j] ** 2 for j in range(dx))
                    v += sig[dy * dx + k] ** 2 + sigma_noise ** 2
                    k_ring += 0.5 * (v + yh[k] ** 2 - 1.0 - math.log(v))
        data += d_ring / len(idx)
        kl += k_ring / len(idx)
    return data + beta * kl


def kl_std_normal_dense(mean, cov):
    """Closed-form KL(N(mean, cov) || N(0, I)) via numpy slogdet."""
    mean = np.atleast_1d(mean)
    cov = np.atleast_2d(cov)
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    return 0.5 * (np.trace(cov) + mean @ mean - len(mean) - logdet)


def central_fd(f, params, h=1e-6):
    params = np.array(params, dtype=float)
    g = np.zeros_like(params)
    for i in range(len(params)):
        p1, p2 = params.copy(), params.copy()
        p1[i] += h
        p2[i] -= h
        g[i] = (f(p1) - f(p2)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-300))


def random_gradient_case(rng, stochastic):
    """A random small problem: S <= 6, T_tr <= 15, <= 5 points per ring."""
    dx = int(rng.integers(1, 3)) if not stochastic else 1
    dy = 1
    theta_dim = dy * (dx + 1)
    width = (2 if stochastic else 1) * theta_dim
    aug = int(rng.integers(0, 6 - width + 1))
    S = width + aug
    H = int(rng.integers(1, 16))
    phi = np.eye(S) + 0.15 * rng.standard_normal((S, S))
    phi /= max(1.0, max(abs(np.linalg.eigvals(phi))))
    z1 = 0.5 * rng.standard_normal(S)
    rings, X = [], []
    for t in range(1, H + 1):
        k = int(rng.integers(0 if t < H else 1, 6))
        rings += [t] * k
        X += [rng.uniform(-2, 2, dx) for _ in range(k)]
    X = np.array(X).reshape(len(rings), dx)
    Y = rng.standard_normal((len(rings), dy))
    return dict(phi=phi, z1=z1, X=X, Y=Y, rings=np.array(rings), theta_dim=theta_dim, aug=aug,
                H=H, stochastic=stochastic, beta=float(rng.uniform(0, 0.5)) if stochastic else 0.0,
                sigma_noise=float(rng.uniform(0.01, 0.3)) if stochastic else 0.0)
