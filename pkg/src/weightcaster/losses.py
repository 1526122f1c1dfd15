"""Ring-summed regression objectives, the linearised predictive Gaussian and the
output-space KL regulariser, with analytic gradients w.r.t. rollout states."""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, WeightCasterError
from .numkit import as_vec, cholesky
from .recurrence import rollout as _rollout, split_state


@dataclass
class LossReport:
    total: float
    data_term: float
    kl_term: float = 0.0
    per_ring_data: list = field(default_factory=list)  # (1-based ring, value) for non-empty rings

    def to_json(self):
        return {
            "total": self.total,
            "data_term": self.data_term,
            "kl_term": self.kl_term,
            "per_ring_data": [[int(t), float(v)] for t, v in self.per_ring_data],
        }

    @classmethod
    def from_json(cls, d):
        return cls(d["total"], d["data_term"], d["kl_term"], [(int(t), v) for t, v in d["per_ring_data"]])


@dataclass
class PredictiveGaussian:
    mean: np.ndarray
    cov: np.ndarray
    noise_floor: float = 0.0

    @property
    def variance(self):
        return np.diag(self.cov).copy()


@dataclass
class RingBatches:
    """Points grouped by ring with their per-point averaging weight 1/B_t.

    ``ring`` is 1-based; rings absent from it are empty and contribute nothing.
    """
    X: np.ndarray
    Y: np.ndarray
    ring: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_assignments(cls, X, Y, ring, index=None):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        ring = np.asarray(ring, dtype=np.int64)
        if index is not None:
            X, Y, ring = X[index], Y[index], ring[index]
        if X.ndim == 1:
            X = X[:, None]
        if Y.ndim == 1:
            Y = Y[:, None]
        if not (len(X) == len(Y) == len(ring)):
            raise DimensionError("X, Y and ring lengths differ")
        counts = np.bincount(ring, minlength=1) if len(ring) else np.zeros(1, np.int64)
        weight = 1.0 / counts[ring] if len(ring) else np.zeros(0)
        return cls(np.ascontiguousarray(X), np.ascontiguousarray(Y), ring, weight)

    @property
    def max_ring(self):
        return int(self.ring.max()) if len(self.ring) else 0


def mse(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise DimensionError(f"mse shape mismatch {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def _evaluate(states, batches, theta_dim, stochastic, beta, sigma_noise, sigma_min):
    H = states.shape[0]
    if batches.max_ring > H:
        raise DimensionError(f"rollout horizon {H} shorter than ring {batches.max_ring}")
    return kernels.ring_objective(states, batches.X, batches.Y, batches.ring - 1, batches.weight,
                                  theta_dim, stochastic, beta, sigma_noise, sigma_min)


def _report(data, kl, beta, batches):
    present = np.unique(batches.ring)
    per_ring = [(int(t), float(data[t - 1])) for t in present]
    d, k = float(data.sum()), float(kl.sum())
    return LossReport(d + beta * k, d, k, per_ring)


def deterministic_loss(rollout, batches, predictor):
    """Sum over rings of the within-ring batch-mean squared error."""
    data, kl, _ = _evaluate(rollout.states, batches, predictor.theta_dim, False, 0.0, 0.0, 0.0)
    return _report(data, kl, 0.0, batches)


def stochastic_loss(rollout, batches, predictor, beta, sigma_noise, sigma_min=1e-4):
    """Mean-weight data term plus ``beta`` times the ring-averaged output KL."""
    data, kl, _ = _evaluate(rollout.states, batches, predictor.theta_dim, True, beta, sigma_noise, sigma_min)
    return _report(data, kl, beta, batches)


def loss_state_gradients(rollout, batches, predictor, stochastic=False, beta=0.0,
                         sigma_noise=0.0, sigma_min=1e-4):
    """dL/dz_t for every rollout step (rows for rings without data are zero)."""
    _, _, grads = _evaluate(rollout.states, batches, predictor.theta_dim, stochastic,
                            beta, sigma_noise, sigma_min)
    return grads


def loss_and_grad(model, batches, predictor, horizon, beta=0.0, sigma_noise=0.0):
    """LossReport and the flat gradient w.r.t. ``model.get_params()``."""
    states = kernels.rollout(model.phi, model.init_state, int(horizon))
    beta_eff = beta if model.stochastic else 0.0
    data, kl, g = _evaluate(states, batches, predictor.theta_dim, model.stochastic,
                            beta_eff, sigma_noise, model.sigma_min)
    gphi, gz = kernels.rollout_adjoint(model.phi, states, g)
    return _report(data, kl, beta_eff, batches), np.concatenate([gphi.ravel(), gz])


def predictive_distribution(model, state, x, predictor, sigma_noise):
    """Linearised Gaussian over outputs at input ``x`` for a stochastic state."""
    if not model.stochastic:
        raise WeightCasterError("predictive_distribution needs a stochastic model")
    mu, sigma = split_state(model, state)
    x = as_vec(x, "x")
    J = predictor.weight_jacobian(mu, x)
    cov = (J * sigma ** 2) @ J.T + sigma_noise ** 2 * np.eye(predictor.output_dim)
    return PredictiveGaussian(predictor.predict(mu, x), cov, float(sigma_noise))


def kl_to_standard_normal(g):
    """KL(N(mean, cov) || N(0, I)) in closed form."""
    mean = np.atleast_1d(np.asarray(g.mean, dtype=np.float64))
    cov = np.atleast_2d(np.asarray(g.cov, dtype=np.float64))
    L = cholesky(cov)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return max(0.5 * (np.trace(cov) + mean @ mean - mean.size - logdet), 0.0)


def rollout_for(model, batches):
    return _rollout(model, max(batches.max_ring, 1))

