"""Command-line front end: simulate, dataset, bounds, and gen subcommands.

Experiments are described by a YAML config file (see configs/ in the source
tree); every flag overrides the matching config key, and sensible defaults
let the common cases run with no config at all. Exit code is 0 on success
and 1 with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys

import yaml

from .bounds import BoundInputs, excess_risk_bound, vc_probability_bound
from .classifiers import Knn, Lda, LogRegL1, Qda, SvmRbf
from .data import save_csv
from .experiments import (
    AllFeatures,
    Beam,
    CsvSource,
    ExperimentConfig,
    Forward,
    SimulationSource,
    emit_report,
    format_mean_se,
    run_experiment,
    scoring_from_dict,
    spec_from_dict,
    strategy_from_dict,
)
from .simgen import SimConfig, generate

_DEFAULT_MODELS = (
    ("knn", Knn()),
    ("lda", Lda()),
    ("qda", Qda()),
    ("svm", SvmRbf()),
    ("logistic", LogRegL1()),
)
_SIM_DEFAULT_D = {"sim1": 5, "sim2": 2, "sim3": 2}


def _load_config(path) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a mapping")
    return cfg


def _models_from(cfg: dict):
    if "models" not in cfg:
        return _DEFAULT_MODELS
    return tuple((name, spec_from_dict(d)) for name, d in cfg["models"].items())


def _strategies_from(cfg: dict, default_d: int, default_k: int):
    if "strategies" not in cfg:
        return (
            AllFeatures(),
            Forward(d=default_d),
            Beam(d=default_d, k=default_k),
        )
    return tuple(strategy_from_dict(d) for d in cfg["strategies"])


def _print_report(report) -> None:
    print(f"| {' | '.join(['strategy'] + list(report.model_names))} |")
    print(f"| {' | '.join(['---'] * (len(report.model_names) + 1))} |")
    for strategy in report.strategy_names:
        row = [strategy]
        for model in report.model_names:
            cell = report.cell(model, strategy)
            row.append("—" if cell.skipped else format_mean_se(cell.mean, cell.se))
        print("| " + " | ".join(row) + " |")
    for w in report.warnings:
        print(f"warning: {w}")


def _finish(report, args, cfg) -> None:
    _print_report(report)
    out_cfg = cfg.get("output", {})
    path = args.output or out_cfg.get("path")
    fmt = args.format or out_cfg.get("format", "csv")
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        emit_report(report, fmt, path)
        print(f"wrote {fmt} report to {path}")


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    sim_cfg = dict(cfg.get("simulation", {}))
    kind = args.sim or sim_cfg.get("kind", "sim1")
    sim_kwargs = {"kind": kind}
    for key in ("n", "p", "m"):
        val = getattr(args, key) if getattr(args, key) is not None else sim_cfg.get(key)
        if val is not None:
            sim_kwargs[key] = val
    if kind != "sim1":
        sim_kwargs.pop("m", None)
        sim_kwargs.setdefault("p", 10)
    sim = SimConfig(**sim_kwargs)
    replications = args.replications or cfg.get("replications", 50)
    d = args.d or _SIM_DEFAULT_D[kind]
    k = args.k or 5
    config = ExperimentConfig(
        source=SimulationSource(sim=sim, replications=replications),
        models=_models_from(cfg),
        strategies=_strategies_from(cfg, d, k),
        scoring=scoring_from_dict(cfg.get("evaluator", {})),
        master_seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        threads=args.threads or cfg.get("threads", 1),
        max_model_fits=cfg.get("max_model_fits", 20_000_000),
    )
    _finish(run_experiment(config), args, cfg)
    return 0


def _cmd_dataset(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    ds_cfg = dict(cfg.get("dataset", {}))
    path = args.csv or ds_cfg.get("path")
    if path is None:
        raise ValueError("a dataset path is required (--csv or config dataset.path)")
    label = args.label_column if args.label_column is not None else ds_cfg.get(
        "label_column"
    )
    if label is None:
        raise ValueError("a label column is required (--label-column)")
    if isinstance(label, str) and label.lstrip("-").isdigit():
        label = int(label)
    folds = args.folds or ds_cfg.get("cv_folds", 5)
    has_header = not args.no_header and ds_cfg.get("has_header", True)
    d = args.d or 10
    k = args.k or 5
    config = ExperimentConfig(
        source=CsvSource(
            path=path, label_column=label, cv_folds=folds, has_header=has_header
        ),
        models=_models_from(cfg),
        strategies=_strategies_from(cfg, d, k),
        scoring=scoring_from_dict(cfg.get("evaluator", {})),
        master_seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        threads=args.threads or cfg.get("threads", 1),
        max_model_fits=cfg.get("max_model_fits", 20_000_000),
    )
    _finish(run_experiment(config), args, cfg)
    return 0


def _cmd_bounds(args) -> int:
    if (args.vc_dim is None) == (args.log_shatter is None):
        raise ValueError("give exactly one of --vc-dim or --log-shatter")
    if args.vc_dim is not None:
        inputs = BoundInputs.from_vc_dimension(
            args.n, args.p, args.d, args.vc_dim, epsilon=args.epsilon
        )
    else:
        inputs = BoundInputs(
            n=args.n, p=args.p, d=args.d,
            log_shatter=args.log_shatter, epsilon=args.epsilon,
        )
    print(
        f"n={inputs.n} p={inputs.p} d={inputs.d} "
        f"log_shatter={inputs.log_shatter:.6g} epsilon={inputs.epsilon}"
    )
    print(f"probability_bound={vc_probability_bound(inputs):.17g}")
    print(f"excess_risk_bound={excess_risk_bound(inputs):.17g}")
    return 0


def _cmd_gen(args) -> int:
    kwargs = {"kind": args.sim, "seed": args.seed or 0}
    for key in ("n", "p", "m"):
        val = getattr(args, key)
        if val is not None:
            kwargs[key] = val
    if args.sim != "sim1":
        kwargs.pop("m", None)
        kwargs.setdefault("p", 10)
    pair = generate(SimConfig(**kwargs))
    os.makedirs(args.output, exist_ok=True)
    train_path = os.path.join(args.output, "train.csv")
    test_path = os.path.join(args.output, "test.csv")
    save_csv(pair.train, train_path)
    save_csv(pair.test, test_path)
    print(f"wrote {train_path} and {test_path}")
    return 0


def _add_experiment_flags(sub) -> None:
    sub.add_argument("--config", help="YAML experiment config")
    sub.add_argument("--seed", type=int, help="master seed override")
    sub.add_argument("--threads", type=int, help="worker threads (results are identical at any count)")
    sub.add_argument("--output", help="report file to write")
    sub.add_argument("--format", choices=("csv", "markdown"))
    sub.add_argument("--d", type=int, help="subset size for the default strategies")
    sub.add_argument("--k", type=int, help="beam width for the default beam strategy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamselect",
        description="Beam-search wrapper feature selection experiments",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run a simulation experiment")
    sim.add_argument("--sim", choices=("sim1", "sim2", "sim3"))
    sim.add_argument("--n", type=int)
    sim.add_argument("--p", type=int)
    sim.add_argument("--m", type=int)
    sim.add_argument("--replications", type=int)
    _add_experiment_flags(sim)
    sim.set_defaults(func=_cmd_simulate)

    ds = subs.add_parser("dataset", help="run a CSV cross-validation experiment")
    ds.add_argument("--csv", help="path to the dataset CSV")
    ds.add_argument("--label-column", help="label column name or 0-based index")
    ds.add_argument("--folds", type=int, help="outer cross-validation folds")
    ds.add_argument("--no-header", action="store_true")
    _add_experiment_flags(ds)
    ds.set_defaults(func=_cmd_dataset)

    bnd = subs.add_parser("bounds", help="evaluate the risk bounds")
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--p", type=int, required=True)
    bnd.add_argument("--d", type=int, required=True)
    bnd.add_argument("--vc-dim", type=int)
    bnd.add_argument("--log-shatter", type=float)
    bnd.add_argument("--epsilon", type=float, default=0.1)
    bnd.set_defaults(func=_cmd_bounds)

    gen = subs.add_parser("gen", help="dump one simulated train/test pair to CSV")
    gen.add_argument("--sim", choices=("sim1", "sim2", "sim3"), required=True)
    gen.add_argument("--n", type=int)
    gen.add_argument("--p", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True, help="directory for train/test CSVs")
    gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean diagnostic, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
