"""Benchmark data: the synthetic cosine task and UCI AirQuality, split so that
train and test inputs have disjoint support."""

import csv
from dataclasses import dataclass, field
import json
import os

import numpy as np

from .errors import DataError, DimensionError

AIRQUALITY_SOURCE = "UCI Machine Learning Repository, Air Quality (id 360), AirQualityUCI.csv"
AIRQUALITY_X = "PT08.S5(O3)"
AIRQUALITY_Y = "PT08.S3(NOx)"
MISSING_SENTINEL = -200.0


@dataclass
class Affine:
    """Per-column ``(v - shift) / scale``."""
    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        self.shift = np.atleast_1d(np.asarray(self.shift, dtype=np.float64))
        self.scale = np.atleast_1d(np.asarray(self.scale, dtype=np.float64))
        if np.any(self.scale == 0) or not np.all(np.isfinite(self.scale)):
            raise DataError("normalisation scale must be finite and non-zero")

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def zscore(cls, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        return cls(data.mean(axis=0), data.std(axis=0))

    def to_json(self):
        return {"shift": self.shift.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_json(cls, d):
        return cls(d["shift"], d["scale"])


def normalize(data, meta):
    return (np.asarray(data, dtype=np.float64) - meta.shift) / meta.scale


def denormalize(data, meta):
    return np.asarray(data, dtype=np.float64) * meta.scale + meta.shift


@dataclass
class Normalization:
    x: Affine
    y: Affine

    def to_json(self):
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    @classmethod
    def from_json(cls, d):
        return cls(Affine.from_json(d["x"]), Affine.from_json(d["y"]))

    @classmethod
    def identity(cls, dx, dy):
        return cls(Affine.identity(dx), Affine.identity(dy))


@dataclass
class LabeledDataset:
    X: np.ndarray
    Y: np.ndarray
    normalization: Normalization = None
    provenance: str = ""

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        if self.Y.ndim == 1:
            self.Y = self.Y[:, None]
        if self.X.shape[0] < 1 or self.X.shape[0] != self.Y.shape[0]:
            raise DimensionError(f"need N >= 1 matching rows, got X{self.X.shape} Y{self.Y.shape}")
        if np.isnan(self.X).any() or np.isnan(self.Y).any():
            raise DataError("dataset contains NaN")
        if self.normalization is None:
            self.normalization = Normalization.identity(self.X.shape[1], self.Y.shape[1])

    def __len__(self):
        return self.X.shape[0]

    @property
    def input_dim(self):
        return self.X.shape[1]

    @property
    def output_dim(self):
        return self.Y.shape[1]


@dataclass
class SplitRule:
    """Train iff ``feature(x) <= threshold``; feature is ``x[coord]`` or ``|x[coord] - center|``."""
    coord: int = 0
    threshold: float = 0.0
    center: float = None

    def feature(self, X):
        v = np.asarray(X, dtype=np.float64)[:, self.coord]
        return v if self.center is None else np.abs(v - self.center)

    def describe(self):
        if self.center is None:
            return f"x[{self.coord}] > {self.threshold:g} -> test"
        return f"|x[{self.coord}] - {self.center:g}| > {self.threshold:g} -> test"

    def to_json(self):
        return {"coord": self.coord, "threshold": self.threshold, "center": self.center}

    @classmethod
    def from_json(cls, d):
        return cls(int(d["coord"]), float(d["threshold"]), d.get("center"))


@dataclass
class OosSplit:
    train: LabeledDataset
    test: LabeledDataset
    rule: SplitRule = field(default_factory=SplitRule)

    def __post_init__(self):
        self.check_disjoint()

    def check_disjoint(self):
        """Train feature range must end strictly before the test range begins."""
        tr = self.rule.feature(self.train.X)
        te = self.rule.feature(self.test.X)
        if not (tr.max() <= self.rule.threshold < te.min()):
            raise DataError(
                f"support overlap: train max {tr.max():g}, test min {te.min():g}, "
                f"threshold {self.rule.threshold:g}"
            )


def cosine_target(x):
    return np.cos(10.0 * x) + 0.5 * x


def gen_cosine(n_train=2000, n_test=500, rng=None, noise_std=0.005, train_radius=1.5, test_radius=3.0):
    """Train on [-r, r), test on [-2r, -r) U (r, 2r] for the default radii."""
    if n_train < 1 or n_test < 1:
        raise ValueError("sample counts must be >= 1")
    if rng is None:
        raise ValueError("gen_cosine needs an Rng")
    x_tr = -train_radius + 2.0 * train_radius * rng.uniform(n_train)
    n_left = n_test // 2
    u = rng.uniform(n_test)
    width = test_radius - train_radius
    x_te = np.concatenate([-test_radius + width * u[:n_left], test_radius - width * u[n_left:]])
    noise = rng.normal(n_train + n_test) * noise_std
    y_tr = cosine_target(x_tr) + noise[:n_train]
    y_te = cosine_target(x_te) + noise[n_train:]
    rule = SplitRule(0, float(train_radius), 0.0)
    return OosSplit(
        LabeledDataset(x_tr, y_tr, provenance="cosine:train"),
        LabeledDataset(x_te, y_te, provenance="cosine:test"),
        rule,
    )


def _parse_decimal_comma(field):
    field = field.strip()
    if not field:
        return None
    try:
        return float(field.replace(",", "."))
    except ValueError:
        return None


def read_airquality_columns(path):
    """Raw (x, y) pairs from the UCI file with sentinel/unparsable rows dropped."""
    if not os.path.isfile(path):
        raise DataError(f"AirQuality file not found: {path}")
    xs, ys = [], []
    with open(path, newline="", encoding="utf-8-sig", errors="replace") as fh:
        reader = csv.reader(fh, delimiter=";")
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        missing = [c for c in (AIRQUALITY_X, AIRQUALITY_Y) if c not in header]
        if missing:
            raise DataError(f"{path}:1: missing required column(s) {missing}")
        ix, iy = header.index(AIRQUALITY_X), header.index(AIRQUALITY_Y)
        for row in reader:
            if len(row) <= max(ix, iy):
                continue
            x, y = _parse_decimal_comma(row[ix]), _parse_decimal_comma(row[iy])
            if x is None or y is None or x == MISSING_SENTINEL or y == MISSING_SENTINEL:
                continue
            if not (np.isfinite(x) and np.isfinite(y)):
                continue
            xs.append(x)
            ys.append(y)
    if not xs:
        raise DataError(f"{path}: no usable rows after dropping missing values")
    return np.array(xs), np.array(ys)


def ingest_airquality(path, rng=None, threshold=1.0):
    """z-score both columns over all retained rows, then test iff x > threshold.

    ``rng`` is accepted for interface symmetry; ingestion consumes no randomness.
    """
    x, y = read_airquality_columns(path)
    norm = Normalization(Affine.zscore(x), Affine.zscore(y))
    xn = normalize(x[:, None], norm.x)
    yn = normalize(y[:, None], norm.y)
    test = xn[:, 0] > threshold
    if test.all() or not test.any():
        raise DataError(f"{path}: retained {len(x)} rows, but the split at x > {threshold:g} "
                        f"leaves the {'train' if test.all() else 'test'} side empty")
    return OosSplit(
        LabeledDataset(xn[~test], yn[~test], norm, "airquality:train"),
        LabeledDataset(xn[test], yn[test], norm, "airquality:test"),
        SplitRule(0, float(threshold), None),
    )


# plain CSV exchange format ---------------------------------------------------

def _columns(prefix, dim):
    return [prefix] if dim == 1 else [f"{prefix}{i}" for i in range(dim)]


def write_dataset_csv(ds, path):
    header = _columns("x", ds.input_dim) + _columns("y", ds.output_dim)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for xr, yr in zip(ds.X, ds.Y):
            w.writerow([repr(float(v)) for v in xr] + [repr(float(v)) for v in yr])


def read_dataset_csv(path, provenance=None):
    if not os.path.isfile(path):
        raise DataError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        xcols = [i for i, h in enumerate(header) if h.startswith("x")]
        ycols = [i for i, h in enumerate(header) if h.startswith("y")]
        if not xcols or not ycols:
            raise DataError(f"{path}:1: header must have x and y columns, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    return LabeledDataset(arr[:, xcols], arr[:, ycols], provenance=provenance or os.path.basename(path))


def save_split(split, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    write_dataset_csv(split.train, os.path.join(out_dir, "train.csv"))
    write_dataset_csv(split.test, os.path.join(out_dir, "test.csv"))
    meta = {
        "dataset": name,
        "split_rule": split.rule.to_json(),
        "split_description": split.rule.describe(),
        "normalization": split.train.normalization.to_json(),
        "n_train": len(split.train),
        "n_test": len(split.test),
    }
    if name == "airquality":
        meta["source"] = AIRQUALITY_SOURCE
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_split(data_dir):
    """``(train, test, meta)`` from a gen-data output directory."""
    meta_path = os.path.join(data_dir, "meta.json")
    meta = {}
    if os.path.isfile(meta_path):
        with open(meta_path) as fh:
            meta = json.load(fh)
    train = read_dataset_csv(os.path.join(data_dir, "train.csv"), "train")
    test = read_dataset_csv(os.path.join(data_dir, "test.csv"), "test")
    if "normalization" in meta:
        norm = Normalization.from_json(meta["normalization"])
        train.normalization = test.normalization = norm
    if "split_rule" in meta:
        OosSplit(train, test, SplitRule.from_json(meta["split_rule"]))  # validates disjointness
    return train, test, meta
