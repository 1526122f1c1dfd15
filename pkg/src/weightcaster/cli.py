"""``weightcaster <gen-data|train|eval|report|plot>``.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""

import argparse
from dataclasses import asdict, dataclass, field, fields
import json
import logging
import os
import sys
import time

import numpy as np

from . import datasets
from .baselines import MlpConfig, gp_fit, gp_predict, mlp_fit, mlp_predict
from .errors import ConfigError, DataError, DimensionError, NumericalError, WeightCasterError
from .figures import render_svg
from .inference import predict_arrays, read_predictions_csv, write_predictions_csv
from .numkit import Rng
from .report import make_metrics, read_metrics, render_table, write_metrics
from .trainer import Checkpoint, TrainConfig, evaluate_full, train, write_log

log = logging.getLogger("weightcaster")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
BASELINES = ("gp", "mlp")


@dataclass
class RunConfig:
    dataset: str = "cosine"
    n_train: int = 2000
    n_test: int = 500
    data_seed: int = 7
    train: TrainConfig = field(default_factory=TrainConfig)
    baselines: list = field(default_factory=lambda: list(BASELINES))
    mlp_hidden: list = field(default_factory=lambda: [64, 64])
    mlp_lr: float = 1e-2
    mlp_iters: int = 5000
    gp_max_n: int = 3000

    def problems(self):
        p = []
        if self.dataset not in datasets_names():
            p.append(f"dataset must be one of {datasets_names()}, got {self.dataset!r}")
        for name in ("n_train", "n_test", "mlp_iters", "gp_max_n"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                p.append(f"{name} must be a positive integer")
        bad = [b for b in self.baselines if b not in BASELINES]
        if bad:
            p.append(f"unknown baselines {bad}; choose from {list(BASELINES)}")
        if not all(isinstance(h, int) and h > 0 for h in self.mlp_hidden):
            p.append("mlp_hidden must be a list of positive integers")
        if not self.mlp_lr > 0:
            p.append("mlp_lr must be positive")
        p.extend(f"train.{msg}" for msg in self.train.problems())
        return p

    def validate(self):
        p = self.problems()
        if p:
            raise ConfigError(p)
        return self

    def to_json(self):
        d = asdict(self)
        d["train"] = self.train.to_json()
        return d

    @classmethod
    def from_json(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        problems = [f"unknown config key {k!r}" for k in sorted(set(d) - known)]
        train_cfg = TrainConfig()
        if "train" in d:
            try:
                train_cfg = TrainConfig.from_json(d.pop("train"))
            except ConfigError as exc:
                problems.extend(f"train: {m}" for m in exc.problems)
        if problems:
            raise ConfigError(problems)
        return cls(train=train_cfg, **d)


def datasets_names():
    return ["cosine", "airquality"]


# config plumbing -------------------------------------------------------------

_TRAIN_FIELDS = [f.name for f in fields(TrainConfig)]
_RUN_FIELDS = [f.name for f in fields(RunConfig) if f.name != "train"]


def _flag(name):
    return "--" + name.replace("_", "-")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def add_config_flags(p):
    p.add_argument("--config", help="JSON run config; individual flags override it")
    g = p.add_argument_group("config overrides")
    for name in _RUN_FIELDS + _TRAIN_FIELDS:
        g.add_argument(_flag(name), dest=f"cfg_{name}", type=_parse_value, default=None, metavar="V")
    p.add_argument("--print-config", action="store_true", help="print the merged config and exit")


def load_run_config(args):
    d = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
    base = RunConfig().to_json()
    train_d = dict(base["train"])
    train_d.update(d.get("train", {}))
    merged = {**base, **{k: v for k, v in d.items() if k != "train"}, "train": train_d}
    for name in _RUN_FIELDS:
        v = getattr(args, f"cfg_{name}", None)
        if v is not None:
            merged[name] = v
    for name in _TRAIN_FIELDS:
        v = getattr(args, f"cfg_{name}", None)
        if v is not None:
            merged["train"][name] = v
    return RunConfig.from_json(merged).validate()


def _dump_config(cfg):
    return json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n"


# commands ----------------------------------------------------------------------

def cmd_gen_data(args):
    cfg = load_run_config(args)
    if args.dataset == "cosine":
        split = datasets.gen_cosine(cfg.n_train, cfg.n_test, Rng(cfg.data_seed))
    else:
        if not args.input:
            raise _Usage("gen-data airquality requires --in FILE")
        split = datasets.ingest_airquality(args.input)
        print(f"source: {datasets.AIRQUALITY_SOURCE}")
    datasets.save_split(split, args.out, args.dataset)
    print(f"wrote {len(split.train)} train / {len(split.test)} test rows to {args.out}")
    return EXIT_OK


def _dataset_name(meta, cfg):
    return meta.get("dataset", cfg.dataset)


def _weightcaster_metrics(ck, train_ds, test_ds, dataset, wallclock):
    out = {}
    for name, ds in (("ind", train_ds), ("oos", test_ds)):
        y_hat, _, _ = predict_arrays(ck, ds.X)
        out[name] = float(np.mean((y_hat - ds.Y) ** 2))
    return make_metrics("weightcaster", dataset, out["ind"], out["oos"], ck.model.params_count, wallclock,
                        seed=ck.config.seed, mode=ck.model.mode)


def _write_all_predictions(ck, train_ds, test_ds, path):
    X = np.vstack([train_ds.X, test_ds.X])
    y_hat, var, rings = predict_arrays(ck, X)
    write_predictions_csv(path, X, y_hat, var, rings, ck.partition.t_train)


def cmd_train(args):
    cfg = load_run_config(args)
    if args.print_config:
        sys.stdout.write(_dump_config(cfg))
        return EXIT_OK
    if not args.data or not args.out:
        raise _Usage("train requires --data DIR and --out DIR")
    train_ds, test_ds, meta = datasets.load_split(args.data)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()

    def progress(it, report):
        log.info("iter %d total %.6g data %.6g kl %.6g", it, report.total, report.data_term, report.kl_term)

    ck, rows = train(train_ds, cfg.train, progress=progress)
    wall = time.perf_counter() - t0
    ck.save(os.path.join(args.out, "checkpoint.json"))
    write_log(rows, os.path.join(args.out, "log.csv"))
    _write_all_predictions(ck, train_ds, test_ds, os.path.join(args.out, "predictions.csv"))
    metrics = _weightcaster_metrics(ck, train_ds, test_ds, _dataset_name(meta, cfg), wall)
    write_metrics(metrics, os.path.join(args.out, "metrics.json"))
    print(json.dumps(metrics, sort_keys=True))
    return EXIT_OK


def run_baseline(method, train_ds, test_ds, cfg, dataset):
    t0 = time.perf_counter()
    if method == "gp":
        model = gp_fit(train_ds.X, train_ds.Y, rng=Rng(cfg.train.seed).child(7), max_n=cfg.gp_max_n)

        def pred(X):
            return gp_predict(model, X)
        extra = {"lengthscale": model.lengthscale, "signal_var": model.signal_var, "noise_var": model.noise_var}
        if model.subsampled_from:
            extra["subsampled_from"] = model.subsampled_from
            extra["subsampled_to"] = len(model.X)
    else:
        mcfg = MlpConfig(tuple(cfg.mlp_hidden), cfg.mlp_lr, cfg.mlp_iters, cfg.train.seed)
        model = mlp_fit(train_ds.X, train_ds.Y, mcfg)

        def pred(X):
            return mlp_predict(model, X), None
        extra = {}
    wall = time.perf_counter() - t0
    mse = [float(np.mean((pred(ds.X)[0] - ds.Y) ** 2)) for ds in (train_ds, test_ds)]
    return make_metrics(method, dataset, mse[0], mse[1], model.params_count, wall,
                        seed=cfg.train.seed, **extra), pred


def cmd_eval(args):
    cfg = load_run_config(args)
    if args.print_config:
        sys.stdout.write(_dump_config(cfg))
        return EXIT_OK
    if not args.data or not args.out:
        raise _Usage("eval requires --data DIR and --out FILE")
    train_ds, test_ds, meta = datasets.load_split(args.data)
    dataset = _dataset_name(meta, cfg)
    if args.method == "weightcaster":
        if not args.checkpoint:
            raise _Usage("eval --method weightcaster requires --checkpoint FILE")
        ck = Checkpoint.load(args.checkpoint)
        t0 = time.perf_counter()
        evaluate_full(ck, train_ds)
        metrics = _weightcaster_metrics(ck, train_ds, test_ds, dataset, time.perf_counter() - t0)
        if args.predictions:
            _write_all_predictions(ck, train_ds, test_ds, args.predictions)
    else:
        metrics, pred = run_baseline(args.method, train_ds, test_ds, cfg, dataset)
        if args.predictions:
            X = np.vstack([train_ds.X, test_ds.X])
            y_hat, var = pred(X)
            oos = np.r_[np.zeros(len(train_ds), bool), np.ones(len(test_ds), bool)]
            # baselines have no rings; the ring column is 0 throughout
            write_predictions_csv(args.predictions, X, y_hat, None if var is None else var[:, None],
                                  np.zeros(len(X), int), 0, extrapolated=oos)
    write_metrics(metrics, args.out)
    print(json.dumps(metrics, sort_keys=True))
    return EXIT_OK


def cmd_report(args):
    table = render_table([read_metrics(p) for p in args.metrics])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_plot(args):
    preds = read_predictions_csv(args.predictions)
    train_ds, test_ds, _ = datasets.load_split(args.data)
    if train_ds.input_dim != 1 or preds["x"].shape[1] != 1:
        raise DimensionError("plot supports 1-D inputs only")
    var = preds["variance"] if args.band else None
    svg = render_svg(np.hstack([train_ds.X, train_ds.Y]), np.hstack([test_ds.X, test_ds.Y]),
                     preds["x"], preds["y_hat"], var, args.title or "")
    with open(args.out, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return EXIT_OK


class _Usage(Exception):
    pass


def build_parser():
    p = argparse.ArgumentParser(prog="weightcaster", description=__doc__.splitlines()[0])
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate or ingest a dataset split")
    g.add_argument("dataset", choices=datasets_names())
    g.add_argument("--out", required=True)
    g.add_argument("--in", dest="input")
    g.add_argument("--config")
    g.add_argument("--seed", dest="cfg_data_seed", type=int, metavar="S", help="data seed")
    g.add_argument("--n-train", dest="cfg_n_train", type=int, metavar="N")
    g.add_argument("--n-test", dest="cfg_n_test", type=int, metavar="N")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="fit the weight recurrence")
    t.add_argument("--data")
    t.add_argument("--out")
    add_config_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="score a checkpoint or run a baseline")
    e.add_argument("--data")
    e.add_argument("--out")
    e.add_argument("--method", choices=["weightcaster", *BASELINES], default="weightcaster")
    e.add_argument("--checkpoint")
    e.add_argument("--predictions", help="also write a predictions CSV")
    add_config_flags(e)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("report", help="render the results table")
    r.add_argument("--metrics", nargs="+", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    pl = sub.add_parser("plot", help="SVG of data, predictions and 2-sigma band")
    pl.add_argument("--predictions", required=True)
    pl.add_argument("--data", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--title")
    pl.add_argument("--no-band", dest="band", action="store_false")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"weightcaster: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DimensionError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WeightCasterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
