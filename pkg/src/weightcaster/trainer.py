"""Training loop: partition, per-ring subsampling, BPTT gradients, AdaBelief,
best-so-far selection on full-data loss, JSON checkpoints."""

from dataclasses import asdict, dataclass, fields
import csv
import json
import logging
import time

import numpy as np

from .errors import ConfigError, DivergenceError, NumericalError
from .datasets import Normalization
from .losses import LossReport, RingBatches, loss_and_grad
from .numkit import Rng
from .optimizer import AdaBeliefState, adabelief_step
from .partition import (AnchorPolicy, METRICS, RingPartition, assign_ring, derive_delta, distances,
                        partition_dataset, resolve_anchor)
from .predictor import LinearPredictor
from .recurrence import DETERMINISTIC, STOCHASTIC, RecurrenceModel

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
LOG_HEADER = ["iter", "total", "data", "kl", "wallclock_ms"]

# RNG stream ids under the run seed
_STREAM_INIT = 0
_STREAM_BATCH = 1


@dataclass
class TrainConfig:
    mode: str = STOCHASTIC
    t_total: int = 600
    t_train: int = 300  # None: take delta from config and read T_tr off the data
    delta: float = None
    anchor: object = "mean"
    metric: str = "euclidean"
    batch_size: int = 32
    beta: float = 1e-2
    sigma_noise: float = 0.05
    augment: int = 2
    lr: float = 1e-3
    max_iter: int = 20000
    eval_every: int = 50
    conv_window: int = 10
    conv_tol: float = 1e-8
    clip_norm: float = None
    seed: int = 0

    def problems(self):
        p = []
        if self.mode not in (DETERMINISTIC, STOCHASTIC):
            p.append(f"mode must be 'deterministic' or 'stochastic', got {self.mode!r}")
        if not isinstance(self.t_total, int) or self.t_total < 1:
            p.append("t_total must be a positive integer")
        if self.t_train is None:
            if self.delta is None or not self.delta > 0:
                p.append("t_train=null requires a positive delta")
        elif not isinstance(self.t_train, int) or self.t_train < 1:
            p.append("t_train must be a positive integer or null")
        elif isinstance(self.t_total, int) and self.t_train > self.t_total:
            p.append(f"t_train ({self.t_train}) must not exceed t_total ({self.t_total})")
        try:
            AnchorPolicy.parse(self.anchor)
        except (ValueError, TypeError) as exc:
            p.append(f"anchor: {exc}")
        if self.metric not in METRICS:
            p.append(f"metric must be one of {sorted(METRICS)}")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            p.append("batch_size must be >= 1")
        if not self.beta >= 0:
            p.append("beta must be >= 0")
        if not self.sigma_noise >= 0:
            p.append("sigma_noise must be >= 0")
        if not isinstance(self.augment, int) or self.augment < 0:
            p.append("augment must be a non-negative integer")
        if not self.lr > 0:
            p.append("lr must be positive")
        for name in ("max_iter", "eval_every", "conv_window"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                p.append(f"{name} must be a positive integer")
        if not self.conv_tol >= 0:
            p.append("conv_tol must be >= 0")
        if self.clip_norm is not None and not self.clip_norm > 0:
            p.append("clip_norm must be positive or null")
        return p

    def validate(self):
        p = self.problems()
        if p:
            raise ConfigError(p)
        return self

    def to_json(self):
        d = asdict(self)
        d["anchor"] = AnchorPolicy.parse(self.anchor).to_json()
        return d

    @classmethod
    def from_json(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError([f"unknown config key {k!r}" for k in unknown])
        return cls(**d)


@dataclass
class Checkpoint:
    model: RecurrenceModel
    partition: RingPartition
    normalization: Normalization
    config: TrainConfig
    final_loss: LossReport
    version: int = CHECKPOINT_VERSION

    @property
    def predictor(self):
        dx = len(self.partition.anchor)
        return LinearPredictor(dx, self.model.theta_dim // (dx + 1))

    def to_json(self):
        return {
            "version": self.version,
            "mode": self.model.mode,
            "recurrence": self.model.to_json(),
            "partition": self.partition.to_json(),
            "normalization": self.normalization.to_json(),
            "config": self.config.to_json(),
            "final_loss": self.final_loss.to_json(),
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            RecurrenceModel.from_json(d["recurrence"]),
            RingPartition.from_json(d["partition"]),
            Normalization.from_json(d["normalization"]),
            TrainConfig.from_json(d["config"]),
            LossReport.from_json(d["final_loss"]),
            int(d["version"]),
        )

    def dumps(self):
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


class _Subsampler:
    """Draws min(B, |ring|) points per ring without replacement.

    Each (ring, iteration) pair gets its own child stream; rings that fit in
    one batch (including empty ones) draw nothing.
    """

    def __init__(self, X, Y, members, batch_size, rng):
        self.X, self.Y = X, Y
        self.B = batch_size
        self.rng = rng
        self.members = {t: idx for t, idx in members.items() if len(idx)}
        self.assign = np.zeros(len(X), dtype=np.int64)
        for t, idx in self.members.items():
            self.assign[idx] = t
        self.crowded = [t for t, idx in self.members.items() if len(idx) > batch_size]
        self.full = RingBatches.from_assignments(X, Y, self.assign)

    def draw(self, it):
        if not self.crowded:
            return self.full
        parts = []
        for t in sorted(self.members):
            idx = self.members[t]
            if len(idx) > self.B:
                idx = idx[self.rng.child(_STREAM_BATCH, t, it).subsample(len(idx), self.B)]
            parts.append(idx)
        return RingBatches.from_assignments(self.X, self.Y, self.assign, np.concatenate(parts))


def setup_partition(X, config):
    anchor = resolve_anchor(config.anchor, X)
    if config.t_train is not None:
        delta = derive_delta(X, anchor, config.metric, config.t_train)
    else:
        delta = float(config.delta)
    return partition_dataset(X, anchor, config.metric, delta, config.t_total)


def train(dataset, config, rng=None, progress=None):
    """Fit the recurrence on ``dataset``; returns ``(Checkpoint, log_rows)``.

    ``log_rows`` has one ``[iter, total, data, kl, wallclock_ms]`` entry per
    full-data evaluation. Raises DivergenceError (carrying the best finite
    checkpoint so far) if the loss stops being finite.
    """
    config.validate()
    rng = Rng(config.seed) if rng is None else rng
    X, Y = dataset.X, dataset.Y
    part, members = setup_partition(X, config)
    predictor = LinearPredictor(X.shape[1], Y.shape[1])
    model = RecurrenceModel.initialize(predictor.theta_dim, config.augment, config.mode,
                                       rng.child(_STREAM_INIT))
    horizon = part.t_train
    sampler = _Subsampler(X, Y, members, config.batch_size, rng)
    full = sampler.full

    opt = AdaBeliefState(lr=config.lr, clip_norm=config.clip_norm)
    params = model.get_params()
    t0 = time.perf_counter()
    log_rows = []
    evals = []
    best = None  # (loss, params, report)

    def snapshot(p, report):
        return Checkpoint(model.with_params(p), part, dataset.normalization, config, report)

    def evaluate(it, p):
        nonlocal best
        report, _ = loss_and_grad(model.with_params(p), full, predictor, horizon,
                                  config.beta, config.sigma_noise)
        if not np.isfinite(report.total):
            raise DivergenceError(f"non-finite full-data loss at iteration {it}",
                                  None if best is None else snapshot(best[1], best[2]))
        ms = (time.perf_counter() - t0) * 1000.0
        log_rows.append([it, report.total, report.data_term, report.kl_term, ms])
        evals.append(report.total)
        if best is None or report.total < best[0]:
            best = (report.total, p.copy(), report)
        if progress:
            progress(it, report)
        return report

    # overflow is detected explicitly below and reported as DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        evaluate(0, params)
        for it in range(1, config.max_iter + 1):
            batches = sampler.draw(it)
            report, grad = loss_and_grad(model.with_params(params), batches, predictor, horizon,
                                         config.beta, config.sigma_noise)
            if not (np.isfinite(report.total) and np.all(np.isfinite(grad))):
                raise DivergenceError(f"non-finite batch loss at iteration {it}",
                                      None if best is None else snapshot(best[1], best[2]))
            try:
                params, opt = adabelief_step(opt, params, grad)
            except NumericalError as exc:
                raise DivergenceError(f"iteration {it}: {exc}",
                                      None if best is None else snapshot(best[1], best[2])) from None
            if it % config.eval_every == 0 or it == config.max_iter:
                evaluate(it, params)
                w = config.conv_window
                if len(evals) > w:
                    ref = evals[-1 - w]
                    if abs(ref - evals[-1]) <= config.conv_tol * max(abs(ref), 1e-300):
                        log.info("converged at iteration %d", it)
                        break
    return snapshot(best[1], best[2]), log_rows


def evaluate_full(checkpoint, dataset):
    """Loss over every point of ``dataset`` with no subsampling and no RNG."""
    part = checkpoint.partition
    rings = assign_ring(distances(dataset.X, part.anchor, part.metric), part.delta)
    batches = RingBatches.from_assignments(dataset.X, dataset.Y, rings)
    cfg = checkpoint.config
    report, _ = loss_and_grad(checkpoint.model, batches, checkpoint.predictor, batches.max_ring,
                              cfg.beta, cfg.sigma_noise)
    return report


def write_log(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for it, total, data, kl, ms in rows:
            w.writerow([it, repr(float(total)), repr(float(data)), repr(float(kl)), f"{ms:.3f}"])
