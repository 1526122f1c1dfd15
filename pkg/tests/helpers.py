import numpy as np

from weightcaster.datasets import Normalization
from weightcaster.losses import LossReport
from weightcaster.partition import RingPartition
from weightcaster.recurrence import RecurrenceModel
from weightcaster.trainer import Checkpoint, TrainConfig


def constant_checkpoint(theta=(2.0, 1.0), mode="deterministic", phi=None, delta=0.1, t_train=5,
                        t_total=10, sigma_noise=0.05, state=None):
    """Hand-built checkpoint: phi = I keeps the weights fixed at every ring."""
    state = np.asarray(theta if state is None else state, dtype=np.float64)
    S = len(state)
    D = 2
    aug = S - (2 * D if mode == "stochastic" else D)
    model = RecurrenceModel(D, aug, mode, np.eye(S) if phi is None else phi, state)
    part = RingPartition(np.array([0.0]), "euclidean", delta, t_total, t_train, np.zeros(0, np.int64))
    cfg = TrainConfig(mode=mode, t_total=t_total, t_train=t_train, sigma_noise=sigma_noise,
                      augment=aug, beta=0.0)
    return Checkpoint(model, part, Normalization.identity(1, 1), cfg, LossReport(0.0, 0.0))
