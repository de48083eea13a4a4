"""Command-line interface.

Three subcommands: ``test`` (independence of X and Y given optional Z),
``skeleton`` (all-pairs structure learning with DOT/JSON export), and
``bench`` (power / FDR experiments with CSV, JSON, and figure output).

Statistical verdicts always exit 0; configuration and input faults exit 2
with a message. Every JSON document echoes the effective configuration and
the master seed, and fixed-seed runs are byte-identical regardless of the
thread count.
"""

from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys

from .data import SplitConfig, load_csv
from .errors import CitestError, ConfigError
from .learners import (
    BaggedTreesSpec,
    BaselineSpec,
    DecisionTreeSpec,
    ElasticNetSpec,
    GaussianNBSpec,
    LogisticRegressionSpec,
    MetaEstimatorSpec,
)
from .losses import is_classification_loss, loss_token, parse_loss_token
from .pcit import PcitConfig, pcit_test
from .report import render_benchmark_figure
from .serialize import dumps
from .skeleton import export_dot, find_neighbours
from .synth import SyntheticGraphSpec, run_fdr_experiment, run_power_experiment

_FAMILIES = {
    "baseline": BaselineSpec,
    "elastic_net": ElasticNetSpec,
    "logistic_regression": LogisticRegressionSpec,
    "gaussian_nb": GaussianNBSpec,
    "decision_tree": DecisionTreeSpec,
    "bagged_trees": BaggedTreesSpec,
}


def _parse_learner(entry):
    entry = dict(entry)
    family = entry.pop("family", None)
    if family not in _FAMILIES:
        raise ConfigError(
            f"unknown learner family {family!r}; expected one of "
            f"{sorted(_FAMILIES)}"
        )
    cls = _FAMILIES[family]
    if "lambda_grid" in entry:
        entry["lambda_grid"] = tuple(float(v) for v in entry["lambda_grid"])
    try:
        return cls(**entry)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from None


def _learner_echo(spec):
    name = type(spec).__name__.removesuffix("Spec")
    fields = {}
    for key in getattr(spec, "__dataclass_fields__", {}):
        value = getattr(spec, key)
        if isinstance(value, tuple):
            value = [float(v) for v in value]
        fields[key] = value
    return {"family": name, **fields}


def _build_meta(settings):
    kwargs = {}
    if "method" in settings:
        kwargs["method"] = settings["method"]
    if "regressors" in settings:
        kwargs["regressors"] = tuple(
            _parse_learner(e) for e in settings["regressors"]
        )
    if "classifiers" in settings:
        kwargs["classifiers"] = tuple(
            _parse_learner(e) for e in settings["classifiers"]
        )
    for key in ("validation_fraction", "cv_folds", "seed"):
        if key in settings:
            kwargs[key] = settings[key]
    return MetaEstimatorSpec(**kwargs)


def _split_losses(tokens):
    regression, classification = [], []
    for token in tokens:
        loss = parse_loss_token(token)
        (classification if is_classification_loss(loss) else regression).append(loss)
    return regression, classification


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from None


def _parse_seed(text):
    if text == "random":
        return secrets.randbits(63)
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"--seed must be an unsigned integer or 'random'") from None
    if value < 0:
        raise ConfigError("--seed must be non-negative")
    return value


class _Settings:
    """Effective configuration: file values overridden by flags."""

    def __init__(self, args):
        file_cfg = _load_json(args.config, "config") if args.config else {}
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")

        def pick(flag_value, key, default):
            if flag_value is not None:
                return flag_value
            return file_cfg.get(key, default)

        self.alpha = float(pick(args.alpha, "alpha", 0.05))
        seed_text = args.seed if args.seed is not None else str(
            file_cfg.get("seed", 0)
        )
        self.seed = _parse_seed(seed_text)
        self.parametric = bool(
            args.parametric or file_cfg.get("parametric", False)
        )
        symmetric_default = bool(file_cfg.get("symmetric", True))
        self.symmetric = False if args.no_symmetric else symmetric_default
        self.threads = int(pick(args.threads, "threads", 1))
        if self.threads < 1:
            raise ConfigError("--threads must be at least 1")
        self.test_fraction = float(file_cfg.get("test_fraction", 0.5))
        self.pooling = getattr(args, "pooling", None) or file_cfg.get(
            "pooling", "nested"
        )

        learner_cfg = dict(file_cfg.get("learners", {}))
        if args.method is not None:
            learner_cfg["method"] = args.method
        if learner_cfg.get("method") == "none":
            # no ensembling: fall back to one default learner per task
            learner_cfg.setdefault("regressors", [{"family": "elastic_net"}])
            learner_cfg.setdefault(
                "classifiers", [{"family": "logistic_regression"}]
            )
        self.meta = _build_meta(learner_cfg)

        loss_tokens = (
            args.losses.split(",")
            if args.losses
            else list(file_cfg.get("losses", []))
        )
        regression, classification = _split_losses([t for t in loss_tokens if t])
        kwargs = {}
        battery = []
        if regression:
            kwargs["regression_loss"] = regression[0]
            battery.extend(regression[1:])
        if classification:
            kwargs["classification_loss"] = classification[0]
            battery.extend(classification[1:])
        try:
            self.pcit = PcitConfig(
                meta=self.meta,
                split=SplitConfig(test_fraction=self.test_fraction, seed=0),
                alpha=self.alpha,
                parametric=self.parametric,
                symmetric=self.symmetric,
                loss_battery=tuple(battery),
                **kwargs,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self):
        cfg = self.pcit
        return {
            "alpha": cfg.alpha,
            "seed": self.seed,
            "parametric": cfg.parametric,
            "symmetric": cfg.symmetric,
            "test_fraction": cfg.split.test_fraction,
            # the worker cap is an execution detail, not statistical
            # configuration; echoing it would break byte-identity across
            # thread counts
            "regression_loss": loss_token(cfg.regression_loss),
            "classification_loss": loss_token(cfg.classification_loss),
            "loss_battery": [loss_token(ls) for ls in cfg.loss_battery],
            "learners": {
                "method": cfg.meta.method,
                "regressors": [_learner_echo(s) for s in cfg.meta.regressors],
                "classifiers": [_learner_echo(s) for s in cfg.meta.classifiers],
                "validation_fraction": cfg.meta.validation_fraction,
                "cv_folds": cfg.meta.cv_folds,
            },
        }


def _require(args, name):
    value = getattr(args, name, None)
    if not value:
        raise ConfigError(f"--{name.replace('_', '-')} is required")
    return value


def _select_columns(dataset, text, flag):
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise ConfigError(f"--{flag} selected no columns")
    missing = [n for n in names if n not in dataset.names]
    if missing:
        raise ConfigError(f"column {missing[0]!r} not found in the data")
    return dataset.select(names), names


def _emit(document, out_path, verdict):
    text = dumps(document)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(verdict)
    else:
        sys.stdout.write(text)
        print(verdict, file=sys.stderr)


def _load_dataset(args):
    path = _require(args, "data")
    schema = _load_json(args.schema, "schema") if args.schema else None
    return load_csv(path, schema=schema)


def run_test_command(args):
    """The ``test`` subcommand; returns the process exit status."""
    settings = _Settings(args)
    dataset = _load_dataset(args)
    x_cols, x_names = _select_columns(dataset, _require(args, "x"), "x")
    y_cols, y_names = _select_columns(dataset, _require(args, "y"), "y")
    z_cols, z_names = ([], [])
    if args.z:
        z_cols, z_names = _select_columns(dataset, args.z, "z")
    overlap = (set(x_names) & set(y_names)) | (
        set(z_names) & (set(x_names) | set(y_names))
    )
    if overlap and set(x_names) != set(y_names):
        # identical X and Y is a legitimate self-test; partial overlap and
        # conditioning on a tested column are configuration mistakes
        raise ConfigError(
            f"column {sorted(overlap)[0]!r} appears in more than one block"
        )

    result = pcit_test(x_cols, y_cols, z_cols, settings.pcit, settings.seed)
    document = {
        "command": "test",
        "data": args.data,
        "x": x_names,
        "y": y_names,
        "z": z_names,
        "independent": result.independent,
        "overall_p": result.overall_p,
        "alpha": result.alpha,
        "targets": [
            {"target": pn.target, "direction": pn.direction, "loss": pn.loss}
            for pn in result.prediction_nulls
        ],
        "raw_p": [pn.raw_p for pn in result.prediction_nulls],
        "adjusted_p": [pn.adjusted_p for pn in result.prediction_nulls],
        "loss_stats": [
            {
                "target": pn.target,
                "direction": pn.direction,
                "loss": pn.loss,
                "baseline_loss": pn.stats.baseline_loss,
                "candidate_loss": pn.stats.candidate_loss,
                "mean_diff": pn.stats.mean_diff,
                "stddev_diff": pn.stats.stddev_diff,
                "n_test": pn.stats.n_test,
            }
            for pn in result.prediction_nulls
        ],
        "config_echo": settings.echo(),
        "seed": settings.seed,
    }
    relation = "independent" if result.independent else "dependent"
    comparison = ">" if result.independent else "<="
    verdict = (
        f"{relation}: overall adjusted p = {result.overall_p:.6g} "
        f"{comparison} alpha = {result.alpha:g}"
    )
    _emit(document, args.out, verdict)
    return 0


def _matrix_rows(matrix):
    rows = []
    for row in matrix:
        rows.append([None if val != val else float(val) for val in row])
    return rows


def run_skeleton_command(args):
    """The ``skeleton`` subcommand; returns the process exit status."""
    settings = _Settings(args)
    dataset = _load_dataset(args)
    result = find_neighbours(
        dataset,
        settings.pcit,
        settings.seed,
        threads=settings.threads,
        pooling=settings.pooling,
    )
    document = {
        "command": "skeleton",
        "data": args.data,
        "variables": list(result.variables),
        "p_matrix": _matrix_rows(result.p_matrix),
        "adjusted_matrix": _matrix_rows(result.adjusted_matrix),
        "adjacency": [[bool(v) for v in row] for row in result.adjacency],
        "edges": [list(edge) for edge in result.edges()],
        "alpha": result.alpha,
        "pooling": result.pooling,
        "config_echo": settings.echo(),
        "seed": settings.seed,
    }
    edges = result.edges()
    verdict = (
        f"skeleton: {len(edges)} edge(s) among {len(result.variables)} "
        f"variables at FDR {result.alpha:g}"
    )
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(export_dot(result))
    _emit(document, args.out, verdict)
    return 0


def _aggregate_dict(agg, timings):
    return {
        "n": agg.n,
        "power": agg.power,
        "power_se": agg.power_se,
        "fdr": agg.fdr,
        "fdr_se": agg.fdr_se,
        "time_ms": agg.time_ms if timings else None,
    }


def _run_dict(run, method, timings):
    return {
        "seed": run.seed,
        "n": run.n,
        "method": method,
        "found_edges": run.found_edges,
        "true_edges": run.true_edges,
        "false_edges": run.false_edges,
        "power": run.power,
        "fdr": run.fdr,
        "time_ms": run.time_ms if timings else None,
    }


def run_bench_command(args):
    """The ``bench`` subcommand; returns the process exit status."""
    settings = _Settings(args)
    out = _require(args, "out")
    try:
        n_grid = [int(t) for t in args.n_grid.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--n-grid must be comma-separated integers") from None
    if args.reps < 1:
        raise ConfigError("--reps must be at least 1")

    if args.experiment == "power":
        report = run_power_experiment(
            n_grid,
            args.reps,
            settings.pcit,
            seed=settings.seed,
            threads=settings.threads,
        )
    else:
        graph_spec = SyntheticGraphSpec(
            p=args.graph_p,
            density=args.density,
            min_abs=args.min_abs,
            seed=settings.seed,
        )
        report = run_fdr_experiment(
            graph_spec,
            n_grid,
            args.reps,
            settings.pcit,
            threads=settings.threads,
        )

    stem = out[: -len(".json")] if out.endswith(".json") else out
    csv_path = stem + ".csv"
    png_path = stem + ".png"
    document = {
        "command": "bench",
        "experiment": args.experiment,
        "n_grid": n_grid,
        "reps": args.reps,
        "aggregates": [_aggregate_dict(a, args.timings) for a in report.aggregates],
        "runs": [_run_dict(r, report.method, args.timings) for r in report.runs],
        "csv": csv_path,
        "figure": png_path,
        "config_echo": settings.echo(),
        "seed": settings.seed,
    }
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(dumps(document))
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "n", "method", "power", "fdr", "time_ms"])
        for run in report.runs:
            writer.writerow(
                [
                    run.seed,
                    run.n,
                    report.method,
                    repr(run.power),
                    repr(run.fdr),
                    f"{run.time_ms:.3f}" if args.timings else "",
                ]
            )
    render_benchmark_figure(report, png_path)
    last = report.aggregates[-1]
    print(
        f"bench {args.experiment}: power {last.power:.3f} at n={last.n} "
        f"({args.reps} reps); wrote {out}, {csv_path}, {png_path}"
    )
    return 0


def _add_shared_flags(parser):
    parser.add_argument("--alpha", type=float, default=None,
                        help="false-discovery rate (default 0.05)")
    parser.add_argument("--seed", default=None,
                        help="unsigned integer or 'random' (default 0)")
    parser.add_argument("--method", default=None,
                        choices=["stacking", "multiplexing", "none"],
                        help="ensembling method (default stacking)")
    parser.add_argument("--parametric", action="store_true",
                        help="use the paired t-test instead of Wilcoxon")
    parser.add_argument("--no-symmetric", action="store_true",
                        help="test only the X-predicts-Y direction")
    parser.add_argument("--losses", default=None,
                        help="comma list: squared, absolute, quantile:<a>, "
                             "misclass, log, brier")
    parser.add_argument("--out", default=None, help="output JSON path")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap; never changes results (default 1)")
    parser.add_argument("--config", default=None,
                        help="JSON config file; flags override its values")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="citest",
        description="Predictive (conditional) independence testing, "
                    "graphical-model skeleton learning, and benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="test X independent of Y given Z")
    p_test.add_argument("--data", help="input CSV (header row required)")
    p_test.add_argument("--schema", default=None,
                        help="JSON column-kind overrides")
    p_test.add_argument("--x", help="comma list of X columns")
    p_test.add_argument("--y", help="comma list of Y columns")
    p_test.add_argument("--z", default=None, help="comma list of Z columns")
    _add_shared_flags(p_test)
    p_test.set_defaults(handler=run_test_command)

    p_skel = sub.add_parser("skeleton", help="learn the undirected skeleton")
    p_skel.add_argument("--data", help="input CSV (header row required)")
    p_skel.add_argument("--schema", default=None,
                        help="JSON column-kind overrides")
    p_skel.add_argument("--dot", default=None, help="write Graphviz DOT here")
    p_skel.add_argument("--pooling", default=None,
                        choices=["nested", "flat"],
                        help="outer FDR composition (default nested)")
    _add_shared_flags(p_skel)
    p_skel.set_defaults(handler=run_skeleton_command)

    p_bench = sub.add_parser("bench", help="power / FDR benchmarks")
    p_bench.add_argument("--experiment", default="power",
                         choices=["power", "fdr"])
    p_bench.add_argument("--n-grid", default="200,400",
                         help="comma list of sample sizes")
    p_bench.add_argument("--reps", type=int, default=3,
                         help="replications per sample size")
    p_bench.add_argument("--graph-p", type=int, default=10,
                         help="fdr experiment: number of variables")
    p_bench.add_argument("--density", type=float, default=0.28,
                         help="fdr experiment: edge density")
    p_bench.add_argument("--min-abs", type=float, default=0.2,
                         help="fdr experiment: smallest off-diagonal magnitude")
    p_bench.add_argument("--timings", action="store_true",
                         help="write measured wall times into the reports "
                              "(off by default to keep outputs reproducible)")
    _add_shared_flags(p_bench)
    p_bench.set_defaults(handler=run_bench_command)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CitestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
