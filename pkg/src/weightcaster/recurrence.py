"""Linear weight-space recurrence ``z_{t+1} = phi @ z_t`` and its adjoint.

Deterministic states are ``[theta, aug]``; stochastic states are
``[mu, s, aug]`` with ``sigma = softplus(s) + sigma_min``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, WeightCasterError
from .numkit import eigvals_small

DETERMINISTIC = "deterministic"
STOCHASTIC = "stochastic"
SIGMA_MIN = 1e-4
NEUTRAL_TOL = 1e-6


def softplus(s):
    s = np.asarray(s, dtype=np.float64)
    return np.maximum(s, 0.0) + np.log1p(np.exp(-np.abs(s)))


def sigmoid(s):
    s = np.asarray(s, dtype=np.float64)
    e = np.exp(-np.abs(s))
    return np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class RecurrenceModel:
    theta_dim: int
    augment_dim: int = 0
    mode: str = DETERMINISTIC
    phi: np.ndarray = None
    init_state: np.ndarray = None
    sigma_min: float = SIGMA_MIN

    def __post_init__(self):
        if self.mode not in (DETERMINISTIC, STOCHASTIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.theta_dim < 1 or self.augment_dim < 0:
            raise ValueError("theta_dim must be >= 1 and augment_dim >= 0")
        S = self.state_dim
        self.phi = np.eye(S) if self.phi is None else np.array(self.phi, dtype=np.float64)
        self.init_state = np.zeros(S) if self.init_state is None else np.array(self.init_state, dtype=np.float64)
        if self.phi.shape != (S, S) or self.init_state.shape != (S,):
            raise DimensionError(f"phi must be {S}x{S} and init_state length {S}")

    @property
    def stochastic(self):
        return self.mode == STOCHASTIC

    @property
    def state_dim(self):
        return (2 if self.stochastic else 1) * self.theta_dim + self.augment_dim

    @property
    def params_count(self):
        S = self.state_dim
        return S * S + S

    @classmethod
    def initialize(cls, theta_dim, augment_dim, mode, rng, sigma_min=SIGMA_MIN):
        """Near-identity transition; small random initial state, zero augment channels."""
        model = cls(theta_dim, augment_dim, mode, sigma_min=sigma_min)
        S = model.state_dim
        model.phi = np.eye(S) + 0.01 * rng.normal(S * S).reshape(S, S)
        z1 = 0.1 * rng.normal(S)
        if augment_dim:
            z1[S - augment_dim:] = 0.0
        model.init_state = z1
        return model

    def get_params(self):
        return np.concatenate([self.phi.ravel(), self.init_state])

    def with_params(self, flat):
        S = self.state_dim
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (S * S + S,):
            raise DimensionError(f"expected {S * S + S} parameters, got {flat.shape}")
        return RecurrenceModel(self.theta_dim, self.augment_dim, self.mode,
                               flat[:S * S].reshape(S, S).copy(), flat[S * S:].copy(), self.sigma_min)

    def to_json(self):
        return {
            "state_dim": self.state_dim,
            "mode": self.mode,
            "theta_dim": self.theta_dim,
            "augment_dim": self.augment_dim,
            "phi": [float(v) for v in self.phi.ravel()],
            "init_state": [float(v) for v in self.init_state],
            "sigma_min": float(self.sigma_min),
        }

    @classmethod
    def from_json(cls, d):
        S = int(d["state_dim"])
        model = cls(int(d["theta_dim"]), int(d["augment_dim"]), d["mode"],
                    np.asarray(d["phi"], dtype=np.float64).reshape(S, S),
                    np.asarray(d["init_state"], dtype=np.float64), float(d["sigma_min"]))
        if model.state_dim != S:
            raise DimensionError("state_dim inconsistent with mode/theta_dim/augment_dim")
        return model


@dataclass
class Rollout:
    states: np.ndarray = field(repr=False)  # (horizon, S); row t-1 is z_t

    @property
    def horizon(self):
        return self.states.shape[0]

    def __getitem__(self, t):
        """1-based state access."""
        return self.states[t - 1]


def rollout(model, horizon):
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return Rollout(kernels.rollout(model.phi, model.init_state, int(horizon)))


def rollout_adjoint(model, horizon, state_grads):
    """Gradients of a loss w.r.t. (phi, z_1) given dL/dz_t for t = 1..horizon."""
    g = np.asarray(state_grads, dtype=np.float64)
    if g.shape != (horizon, model.state_dim):
        raise DimensionError(f"state_grads must have shape ({horizon}, {model.state_dim}), got {g.shape}")
    states = kernels.rollout(model.phi, model.init_state, int(horizon))
    return kernels.rollout_adjoint(model.phi, states, g)


def split_state(model, state):
    state = np.asarray(state, dtype=np.float64)
    D = model.theta_dim
    if state.shape[-1] != model.state_dim:
        raise DimensionError(f"state length {state.shape[-1]} != {model.state_dim}")
    if not model.stochastic:
        return state[..., :D]
    return state[..., :D], softplus(state[..., D:2 * D]) + model.sigma_min


def sample_weights(model, state, rng):
    """Reparameterised draw ``mu + sigma * eps``."""
    if not model.stochastic:
        raise WeightCasterError("sample_weights needs a stochastic model")
    mu, sigma = split_state(model, state)
    return mu + sigma * rng.normal(model.theta_dim)


def spectral_report(model):
    """(modulus, class, eigenvalue) for each eigenvalue of phi, largest first."""
    out = []
    for lam in eigvals_small(model.phi):
        mod = abs(lam)
        if abs(mod - 1.0) <= NEUTRAL_TOL:
            kind = "neutral"
        elif mod < 1.0:
            kind = "decaying"
        else:
            kind = "growing"
        out.append((mod, kind, lam))
    return out
