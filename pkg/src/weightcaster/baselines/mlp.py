"""Fully connected tanh network trained full-batch with AdaBelief.

Backprop is written out by hand; parameters live in one flat vector so the
shared optimizer can drive them.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError
from ..numkit import Rng
from ..optimizer import AdaBeliefState, adabelief_step


@dataclass
class MlpConfig:
    hidden: tuple = (64, 64)
    lr: float = 1e-2
    iters: int = 5000
    seed: int = 0


@dataclass
class MlpModel:
    sizes: tuple
    params: np.ndarray = field(repr=False)
    config: MlpConfig = None
    final_loss: float = float("nan")

    @property
    def params_count(self):
        return int(self.params.size)

    def layers(self, params=None):
        """Yield ``(W, b)`` views into the flat parameter vector."""
        p = self.params if params is None else params
        off = 0
        out = []
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            W = p[off:off + n_in * n_out].reshape(n_in, n_out)
            off += n_in * n_out
            b = p[off:off + n_out]
            off += n_out
            out.append((W, b))
        return out


def n_params(sizes):
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def init_params(sizes, rng):
    """Glorot-uniform weights, zero biases."""
    parts = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / (n_in + n_out))
        parts.append((2.0 * rng.uniform(n_in * n_out) - 1.0) * lim)
        parts.append(np.zeros(n_out))
    return np.concatenate(parts)


def forward(model, params, X):
    acts = [X]
    h = X
    layers = model.layers(params)
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        h = z if i == len(layers) - 1 else np.tanh(z)
        acts.append(h)
    return acts


def loss_and_grad(model, params, X, Y):
    """Mean squared error over all outputs and its gradient w.r.t. the flat params."""
    acts = forward(model, params, X)
    out = acts[-1]
    r = out - Y
    loss = float(np.mean(r * r))
    delta = 2.0 * r / r.size
    layers = model.layers(params)
    grads = []
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        h_in = acts[i]
        grads.append(delta.sum(axis=0))
        grads.append(h_in.T @ delta)
        if i > 0:
            delta = (delta @ W.T) * (1.0 - h_in * h_in)
    grads.reverse()  # now [dW0, db0, dW1, db1, ...]
    flat = np.concatenate([g.ravel() for g in grads])
    return loss, flat


def mlp_fit(X, Y, config=None, rng=None):
    config = MlpConfig() if config is None else config
    X = np.asarray(X, dtype=np.float64).reshape(len(X), -1)
    Y = np.asarray(Y, dtype=np.float64).reshape(len(X), -1)
    rng = Rng(config.seed) if rng is None else rng
    sizes = (X.shape[1], *config.hidden, Y.shape[1])
    model = MlpModel(sizes, init_params(sizes, rng), config)
    params = model.params
    opt = AdaBeliefState(lr=config.lr)
    best_loss, best = np.inf, params
    for it in range(config.iters + 1):
        loss, grad = loss_and_grad(model, params, X, Y)
        if not np.isfinite(loss):
            raise DivergenceError(f"MLP loss became non-finite at iteration {it}")
        if loss < best_loss:
            best_loss, best = loss, params
        if it < config.iters:
            params, opt = adabelief_step(opt, params, grad)
    # constant-lr adaptive steps oscillate near the optimum; keep the best iterate
    model.params = best
    model.final_loss = float(best_loss)
    return model


def mlp_predict(model, X):
    X = np.asarray(X, dtype=np.float64).reshape(-1, model.sizes[0])
    return forward(model, model.params, X)[-1]
