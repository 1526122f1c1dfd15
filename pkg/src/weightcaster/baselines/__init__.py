"""Reference regressors: exact GP and a tanh MLP."""

from .gp import GpModel, gp_fit, gp_predict
from .mlp import MlpConfig, MlpModel, mlp_fit, mlp_predict

__all__ = ["GpModel", "gp_fit", "gp_predict", "MlpConfig", "MlpModel", "mlp_fit", "mlp_predict"]
