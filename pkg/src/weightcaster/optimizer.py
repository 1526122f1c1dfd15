"""AdaBelief on a flat parameter vector."""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError


@dataclass
class AdaBeliefState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-16
    clip_norm: float = None
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    s: np.ndarray = field(default=None, repr=False)

    def to_json(self):
        return {
            "lr": self.lr, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps,
            "clip_norm": self.clip_norm, "step": self.step,
            "m": None if self.m is None else self.m.tolist(),
            "s": None if self.s is None else self.s.tolist(),
        }

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        for k in ("m", "s"):
            if d[k] is not None:
                d[k] = np.asarray(d[k], dtype=np.float64)
        return cls(**d)


def adabelief_step(state, params, grads):
    """One update; returns ``(new_params, new_state)`` and leaves inputs untouched.

    The belief term is ``(g - m)^2`` with ``eps`` added inside the accumulator
    and again in the denominator.
    """
    params = np.asarray(params, dtype=np.float64)
    g = np.asarray(grads, dtype=np.float64)
    if g.shape != params.shape:
        raise ValueError(f"gradient shape {g.shape} != parameter shape {params.shape}")
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NumericalError(f"non-finite gradient at parameter index {int(bad[0])}")
    if state.clip_norm is not None:
        norm = float(np.linalg.norm(g))
        if norm > state.clip_norm:
            g = g * (state.clip_norm / norm)

    m = np.zeros_like(params) if state.m is None else state.m
    s = np.zeros_like(params) if state.s is None else state.s
    t = state.step + 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    with np.errstate(over="ignore", invalid="ignore"):
        m = b1 * m + (1.0 - b1) * g
        s = b2 * s + (1.0 - b2) * (g - m) ** 2 + eps
        m_hat = m / (1.0 - b1 ** t)
        s_hat = s / (1.0 - b2 ** t)
        new = params - state.lr * m_hat / (np.sqrt(s_hat) + eps)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(new))):
        raise NumericalError(f"optimizer state overflowed at step {t}")
    return new, AdaBeliefState(state.lr, b1, b2, eps, state.clip_norm, t, m, s)
