"""Out-of-support regression by forecasting per-ring weights with a linear
recurrence in weight space."""

from .kernels import BACKEND
from .numkit import Rng
from .partition import AnchorPolicy, RingPartition, assign_ring, derive_delta, partition_dataset, resolve_anchor
from .predictor import LinearPredictor
from .recurrence import RecurrenceModel, rollout, rollout_adjoint, spectral_report
from .trainer import Checkpoint, TrainConfig, evaluate_full, train
from .inference import predict_batch, predict_mc, predict_point

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Rng", "AnchorPolicy", "RingPartition", "assign_ring", "derive_delta",
    "partition_dataset", "resolve_anchor", "LinearPredictor", "RecurrenceModel", "rollout",
    "rollout_adjoint", "spectral_report", "Checkpoint", "TrainConfig", "evaluate_full", "train",
    "predict_batch", "predict_mc", "predict_point",
]
