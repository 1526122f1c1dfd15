"""Concentric-ring decomposition of the input domain around an anchor."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DegenerateGeometryError, DimensionError, PartitionRangeError
from .numkit import as_mat, as_vec

DELTA_GUARD = 1e-9


@dataclass(frozen=True)
class AnchorPolicy:
    kind: str = "mean"  # "mean" | "min" | "explicit"
    point: tuple = ()

    def __post_init__(self):
        if self.kind not in ("mean", "min", "explicit"):
            raise ValueError(f"unknown anchor policy {self.kind!r}")
        if self.kind == "explicit" and not self.point:
            raise ValueError("explicit anchor needs a point")

    @classmethod
    def parse(cls, spec):
        """Accepts "mean", "min" or a list of coordinates."""
        if isinstance(spec, AnchorPolicy):
            return spec
        if isinstance(spec, str):
            return cls(spec)
        return cls("explicit", tuple(float(v) for v in np.atleast_1d(spec)))

    def to_json(self):
        return list(self.point) if self.kind == "explicit" else self.kind


def euclidean(a, b):
    return np.sqrt(np.sum((np.asarray(a) - np.asarray(b)) ** 2, axis=-1))


def manhattan(a, b):
    return np.sum(np.abs(np.asarray(a) - np.asarray(b)), axis=-1)


METRICS = {"euclidean": euclidean, "manhattan": manhattan}


def get_metric(name):
    try:
        return METRICS[name]
    except KeyError:
        raise ValueError(f"unknown distance metric {name!r}; choose from {sorted(METRICS)}") from None


def resolve_anchor(policy, train_inputs):
    policy = AnchorPolicy.parse(policy)
    X = np.asarray(train_inputs, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] == 0:
        raise DimensionError("cannot resolve an anchor from an empty training set")
    if policy.kind == "mean":
        return X.mean(axis=0)
    if policy.kind == "min":
        return X.min(axis=0)
    point = as_vec(policy.point, "anchor")
    if point.shape[0] != X.shape[1]:
        raise DimensionError(f"anchor has dimension {point.shape[0]}, inputs have {X.shape[1]}")
    return point


def distances(inputs, anchor, metric="euclidean"):
    X = as_mat(inputs, "inputs")
    return get_metric(metric)(X, as_vec(anchor, "anchor")[None, :])


def derive_delta(train_inputs, anchor, metric, t_train):
    """Ring width so the farthest training point falls just inside ring ``t_train``."""
    if t_train < 1:
        raise ValueError("t_train must be >= 1")
    d_max = float(np.max(distances(train_inputs, anchor, metric)))
    if d_max <= 0.0:
        raise DegenerateGeometryError("all training points coincide with the anchor")
    return d_max * (1.0 + DELTA_GUARD) / t_train


def assign_ring(distance, delta):
    """1-based ring index: ring t covers [(t-1)*delta, t*delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if np.ndim(distance) == 0:
        return int(math.floor(distance / delta)) + 1
    return np.floor(np.asarray(distance) / delta).astype(np.int64) + 1


@dataclass
class RingPartition:
    anchor: np.ndarray
    metric: str
    delta: float
    t_total: int
    t_train: int
    assignments: np.ndarray = field(repr=False)  # 1-based, one per point

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 1 <= self.t_train <= self.t_total:
            raise PartitionRangeError(f"need 1 <= t_train ({self.t_train}) <= t_total ({self.t_total})")

    def ring_members(self):
        """Per-ring index lists for rings 1..t_total (keys are 1-based)."""
        order = np.argsort(self.assignments, kind="stable")
        bounds = np.searchsorted(self.assignments[order], np.arange(1, self.t_total + 2))
        return {t: order[bounds[t - 1]:bounds[t]] for t in range(1, self.t_total + 1)}

    def to_json(self):
        return {
            "anchor": [float(v) for v in self.anchor],
            "metric": self.metric,
            "delta": float(self.delta),
            "t_total": int(self.t_total),
            "t_train": int(self.t_train),
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            anchor=np.asarray(d["anchor"], dtype=np.float64),
            metric=d["metric"],
            delta=float(d["delta"]),
            t_total=int(d["t_total"]),
            t_train=int(d["t_train"]),
            assignments=np.zeros(0, dtype=np.int64),
        )


def partition_dataset(inputs, anchor, metric, delta, t_total):
    """Assign every training point to a ring; points beyond ``t_total`` are an error."""
    get_metric(metric)
    rings = assign_ring(distances(inputs, anchor, metric), delta)
    if rings.max() > t_total:
        bad = int(np.argmax(rings))
        raise PartitionRangeError(
            f"training point {bad} falls in ring {int(rings[bad])} beyond t_total={t_total}"
        )
    part = RingPartition(
        anchor=as_vec(anchor, "anchor").copy(),
        metric=metric,
        delta=float(delta),
        t_total=int(t_total),
        t_train=int(rings.max()),
        assignments=rings,
    )
    return part, part.ring_members()
