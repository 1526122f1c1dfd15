"""Affine per-ring base model with an explicit weight vector.

Weight layout: slope block (D_y x D_x, row-major) followed by the intercept
block (D_y), so ``theta_dim = D_y * (D_x + 1)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class LinearPredictor:
    input_dim: int = 1
    output_dim: int = 1

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1:
            raise DimensionError("predictor dimensions must be positive")

    @property
    def theta_dim(self):
        return self.output_dim * (self.input_dim + 1)

    def split(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape[-1] != self.theta_dim:
            raise DimensionError(f"expected {self.theta_dim} weights, got {theta.shape[-1]}")
        n = self.output_dim * self.input_dim
        slope = theta[..., :n].reshape(theta.shape[:-1] + (self.output_dim, self.input_dim))
        return slope, theta[..., n:]

    def _check_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0:
            x = x.reshape(1)
        if x.shape[-1] != self.input_dim:
            raise DimensionError(f"expected input of dimension {self.input_dim}, got {x.shape[-1]}")
        return x

    def predict(self, theta, x):
        """``slope @ x + intercept``; broadcasts over leading axes of theta/x."""
        x = self._check_x(x)
        slope, intercept = self.split(theta)
        return np.einsum("...kj,...j->...k", slope, x) + intercept

    def weight_jacobian(self, theta, x):
        """d prediction / d theta, shape (D_y, D_theta). Independent of theta."""
        x = self._check_x(x)
        if x.ndim != 1:
            raise DimensionError("weight_jacobian takes a single input point")
        self.split(theta)
        Dx, Dy = self.input_dim, self.output_dim
        J = np.zeros((Dy, self.theta_dim))
        for k in range(Dy):
            J[k, k * Dx:(k + 1) * Dx] = x
            J[k, Dy * Dx + k] = 1.0
        return J


def predict(p, theta, x):
    return p.predict(theta, x)


def weight_jacobian(p, theta, x):
    return p.weight_jacobian(theta, x)
