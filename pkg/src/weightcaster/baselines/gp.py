"""Exact zero-mean GP regression with an RBF kernel.

Hyperparameters come from a log-spaced grid scored by the log marginal
likelihood. For a fixed lengthscale the RBF Gram matrix is diagonalised once,
after which every (signal, noise) pair is scored in O(N).
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DecompositionError, NumericalError
from ..numkit import cho_solve, cholesky

MAX_EXACT_N = 5000


def default_grid(points=7):
    return {
        "lengthscale": np.logspace(-2, 1, points),
        "signal_var": np.logspace(-2, 1, points),
        "noise_var": np.logspace(-6, 0, points),
    }


def rbf(A, B, lengthscale, signal_var=1.0):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d2 = (np.sum(A * A, 1)[:, None] + np.sum(B * B, 1)[None, :] - 2.0 * A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return signal_var * np.exp(-0.5 * d2 / lengthscale ** 2)


@dataclass
class GpModel:
    lengthscale: float
    signal_var: float
    noise_var: float
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    log_ml: float = float("nan")
    subsampled_from: int = None

    @property
    def params_count(self):
        return 3


def _log_ml_eig(evals, proj2, s2, n2):
    lam = s2 * evals + n2
    if lam.min() <= 0:
        return -np.inf
    N, dy = proj2.shape
    return float(-0.5 * np.sum(proj2 / lam[:, None]) - 0.5 * dy * np.sum(np.log(lam))
                 - 0.5 * N * dy * np.log(2 * np.pi))


def factorize(X, Y, lengthscale, signal_var, noise_var):
    K = rbf(X, X, lengthscale, signal_var)
    K[np.diag_indices_from(K)] += noise_var
    L = cholesky(K)
    alpha = cho_solve(L, Y)
    N, dy = Y.shape
    log_ml = float(-0.5 * np.sum(Y * alpha) - dy * np.sum(np.log(np.diag(L))) - 0.5 * N * dy * np.log(2 * np.pi))
    return L, alpha, log_ml


def gp_fit(X, Y, grid=None, rng=None, max_n=3000):
    """Grid-search the marginal likelihood, then factorise the winner.

    Training sets larger than ``max_n`` are uniformly subsampled with ``rng``.
    """
    X = np.asarray(X, dtype=np.float64).reshape(len(X), -1)
    Y = np.asarray(Y, dtype=np.float64).reshape(len(X), -1)
    sub_from = None
    if len(X) > max_n:
        if rng is None:
            raise ValueError(f"{len(X)} training rows exceed {max_n}; pass an rng to subsample")
        sub_from = len(X)
        idx = rng.subsample(len(X), max_n)
        X, Y = X[idx], Y[idx]
    if len(X) > MAX_EXACT_N:
        raise ValueError(f"exact GP limited to {MAX_EXACT_N} points")
    grid = default_grid() if grid is None else grid

    scored = []
    for ell in grid["lengthscale"]:
        evals, Q = np.linalg.eigh(rbf(X, X, ell))
        proj2 = (Q.T @ Y) ** 2
        for s2 in grid["signal_var"]:
            for n2 in grid["noise_var"]:
                scored.append((_log_ml_eig(evals, proj2, s2, n2), ell, s2, n2))
    scored.sort(key=lambda r: -r[0])
    for lml, ell, s2, n2 in scored:
        if not np.isfinite(lml):
            break
        try:
            L, alpha, log_ml = factorize(X, Y, ell, s2, n2)
        except DecompositionError:
            continue
        return GpModel(float(ell), float(s2), float(n2), X, Y, L, alpha, log_ml, sub_from)
    raise NumericalError("every grid point failed to factorise K + noise*I")


def gp_predict(model, Xq):
    """Posterior mean (M, D_y) and predictive variance (M,) including noise."""
    Xq = np.asarray(Xq, dtype=np.float64).reshape(-1, model.X.shape[1])
    Ks = rbf(Xq, model.X, model.lengthscale, model.signal_var)
    mean = Ks @ model.alpha
    v = cho_solve(model.chol, Ks.T)
    var = model.signal_var + model.noise_var - np.sum(Ks * v.T, axis=1)
    return mean, np.maximum(var, 0.0)
