"""Serving predictions from a checkpoint: ring lookup, rollout to the needed
horizon (past T if necessary), and the point or Gaussian prediction."""

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, WeightCasterError
from .losses import PredictiveGaussian, predictive_distribution
from .numkit import as_mat, as_vec
from .partition import assign_ring, distances
from .recurrence import sample_weights, split_state


@dataclass
class Prediction:
    ring: int
    y_hat: np.ndarray
    gaussian: PredictiveGaussian = None
    extrapolated: bool = False


def _rings(checkpoint, X):
    part = checkpoint.partition
    return assign_ring(distances(X, part.anchor, part.metric), part.delta)


def _predict_from_states(checkpoint, states, X, rings):
    model, pred = checkpoint.model, checkpoint.predictor
    sigma_noise = checkpoint.config.sigma_noise
    t_train = checkpoint.partition.t_train
    out = []
    for x, t in zip(X, rings):
        z = states[t - 1]
        if model.stochastic:
            g = predictive_distribution(model, z, x, pred, sigma_noise)
            out.append(Prediction(int(t), g.mean, g, bool(t > t_train)))
        else:
            out.append(Prediction(int(t), pred.predict(split_state(model, z), x), None, bool(t > t_train)))
    return out


def predict_point(checkpoint, x):
    x = as_vec(x, "x")
    if x.shape[0] != len(checkpoint.partition.anchor):
        raise DimensionError(f"x has dimension {x.shape[0]}, model expects {len(checkpoint.partition.anchor)}")
    t = int(_rings(checkpoint, x[None, :])[0])
    states = kernels.rollout(checkpoint.model.phi, checkpoint.model.init_state, t)
    return _predict_from_states(checkpoint, states, x[None, :], [t])[0]


def predict_batch(checkpoint, X):
    """One rollout to the largest ring needed, shared by every point."""
    X = as_mat(X, "X")
    if X.shape[1] != len(checkpoint.partition.anchor):
        raise DimensionError(f"X has {X.shape[1]} columns, model expects {len(checkpoint.partition.anchor)}")
    rings = _rings(checkpoint, X)
    states = kernels.rollout(checkpoint.model.phi, checkpoint.model.init_state, int(rings.max()))
    return _predict_from_states(checkpoint, states, X, rings)


def predict_arrays(checkpoint, X):
    """Vectorised ``(y_hat (N, D_y), variance (N, D_y) or None, rings (N,))``."""
    X = as_mat(X, "X")
    rings = _rings(checkpoint, X)
    model, pred = checkpoint.model, checkpoint.predictor
    states = kernels.rollout(model.phi, model.init_state, int(rings.max()))[rings - 1]
    if not model.stochastic:
        return pred.predict(split_state(model, states), X), None, rings
    mu, sigma = split_state(model, states)
    y_hat = pred.predict(mu, X)
    s_slope, s_int = pred.split(sigma ** 2)
    var = np.einsum("nkj,nj->nk", s_slope, X * X) + s_int + checkpoint.config.sigma_noise ** 2
    return y_hat, var, rings


def predict_mc(checkpoint, x, n_samples, rng):
    """Empirical mean/variance of f_theta(x) over reparameterised weight draws."""
    model = checkpoint.model
    if not model.stochastic:
        raise WeightCasterError("predict_mc needs a stochastic checkpoint")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    x = as_vec(x, "x")
    t = int(_rings(checkpoint, x[None, :])[0])
    z = kernels.rollout(model.phi, model.init_state, t)[t - 1]
    mu, sigma = split_state(model, z)
    eps = rng.normal(n_samples * model.theta_dim).reshape(n_samples, model.theta_dim)
    ys = checkpoint.predictor.predict(mu + sigma * eps, x)
    return ys.mean(axis=0), ys.var(axis=0, ddof=1)


def sample_prediction(checkpoint, x, rng):
    """A single prediction under one reparameterised weight draw."""
    x = as_vec(x, "x")
    t = int(_rings(checkpoint, x[None, :])[0])
    z = kernels.rollout(checkpoint.model.phi, checkpoint.model.init_state, t)[t - 1]
    return checkpoint.predictor.predict(sample_weights(checkpoint.model, z, rng), x)


def write_predictions_csv(path, X, y_hat, variance, rings, t_train, extrapolated=None):
    """Columns: x..., y_hat..., variance..., ring, extrapolated."""
    X = np.asarray(X, dtype=np.float64).reshape(len(rings), -1)
    y_hat = np.asarray(y_hat, dtype=np.float64).reshape(len(rings), -1)
    dx, dy = X.shape[1], y_hat.shape[1]
    if variance is None:
        variance = np.zeros_like(y_hat)
    variance = np.asarray(variance, dtype=np.float64).reshape(len(rings), -1)
    rings = np.asarray(rings, dtype=np.int64)
    if extrapolated is None:
        extrapolated = rings > t_train

    def cols(p, d):
        return [p] if d == 1 else [f"{p}{i}" for i in range(d)]

    header = cols("x", dx) + cols("y_hat", dy) + cols("variance", dy) + ["ring", "extrapolated"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(rings)):
            w.writerow([repr(float(v)) for v in X[i]] + [repr(float(v)) for v in y_hat[i]]
                       + [repr(float(v)) for v in variance[i]]
                       + [int(rings[i]), int(extrapolated[i])])


def read_predictions_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    arr = np.array([[float(v) for v in r] for r in rows]) if rows else np.zeros((0, len(header)))
    def pick(prefix):
        return arr[:, [i for i, h in enumerate(header) if h == prefix or
                       (h.startswith(prefix) and h[len(prefix):].isdigit())]]
    return {
        "x": pick("x"),
        "y_hat": pick("y_hat"),
        "variance": pick("variance"),
        "ring": arr[:, header.index("ring")].astype(int),
        "extrapolated": arr[:, header.index("extrapolated")].astype(bool),
    }
