"""End-to-end experiment runner: data -> search -> fit -> score -> report.

A configured experiment runs every (model, feature-strategy) cell either over
seeded simulation replications or over the outer folds of a CSV dataset, and
aggregates misclassification rates into means and standard errors. Feature
selection always happens inside the training data of the replication or fold,
never on evaluation rows.

Reports are deterministic functions of the configuration: replication r draws
its data from a seed mixed from (master_seed, r), and results are merged in
replication order regardless of the thread count.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .classifiers import FitError, Knn, Lda, LogRegL1, Qda, SvmRbf, fit_arrays
from .data import load_csv, stratified_kfold
from .search import (
    BudgetExceeded,
    Evaluator,
    Holdout,
    InnerCV,
    SearchAborted,
    TrainResubstitution,
    beam_search,
    forward_selection,
)
from .simgen import SimConfig, generate

__all__ = [
    "AllFeatures",
    "Forward",
    "Beam",
    "SimulationSource",
    "CsvSource",
    "ExperimentConfig",
    "CellResult",
    "ExperimentReport",
    "mix_seed",
    "run_experiment",
    "emit_report",
    "format_mean_se",
    "spec_to_dict",
    "spec_from_dict",
    "scoring_to_dict",
    "scoring_from_dict",
]


def mix_seed(*parts) -> int:
    """Stable 64-bit mix of integer parts (numpy's SeedSequence hash)."""
    seq = np.random.SeedSequence(tuple(int(p) for p in parts))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class AllFeatures:
    """Use every column; never touches the search module."""

    name: str = "all_features"


@dataclass(frozen=True)
class Forward:
    d: int
    name: str = "forward"


@dataclass(frozen=True)
class Beam:
    d: int
    k: int
    name: str = "beam"


Strategy = AllFeatures | Forward | Beam


@dataclass(frozen=True)
class SimulationSource:
    """Seeded replications of one simulation setting."""

    sim: SimConfig
    replications: int = 50

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


@dataclass(frozen=True)
class CsvSource:
    """Outer cross-validation over an ingested CSV dataset."""

    path: str
    label_column: str | int
    cv_folds: int = 5
    has_header: bool = True

    def __post_init__(self):
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be at least 2")


@dataclass(frozen=True)
class ExperimentConfig:
    source: SimulationSource | CsvSource
    models: tuple[tuple[str, object], ...]
    strategies: tuple[Strategy, ...]
    scoring: object = InnerCV(folds=5)
    master_seed: int = 0
    threads: int = 1
    max_model_fits: int = 20_000_000

    def __post_init__(self):
        if not self.models:
            raise ValueError("need at least one model")
        if not self.strategies:
            raise ValueError("need at least one strategy")
        names = [name for name, _ in self.models]
        if len(set(names)) != len(names):
            raise ValueError("model names must be unique")
        snames = [s.name for s in self.strategies]
        if len(set(snames)) != len(snames):
            raise ValueError("strategy names must be unique")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class CellResult:
    """Aggregated outcomes of one (model, strategy) cell."""

    model: str
    strategy: str
    rates: list[float] = field(default_factory=list)
    subset_counts: Counter = field(default_factory=Counter)
    failures: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.rates)

    @property
    def skipped(self) -> bool:
        return self.count == 0

    @property
    def skipped_reason(self) -> str:
        if not self.skipped:
            return ""
        return self.failures[0] if self.failures else "no replications"

    @property
    def mean(self) -> float:
        return float(np.mean(self.rates)) if self.rates else math.nan

    @property
    def se(self) -> float:
        if self.count < 2:
            return 0.0
        return float(np.std(self.rates, ddof=1) / math.sqrt(self.count))


@dataclass
class ExperimentReport:
    model_names: tuple[str, ...]
    strategy_names: tuple[str, ...]
    cells: dict[tuple[str, str], CellResult]
    replications: int
    metadata: dict
    warnings: list[str] = field(default_factory=list)

    def cell(self, model: str, strategy: str) -> CellResult:
        return self.cells[(model, strategy)]


def _planned_evaluations(p: int, strategy: Strategy) -> int:
    """Upper bound on candidate evaluations for one search (before dedup)."""
    if isinstance(strategy, AllFeatures):
        return 0
    d = strategy.d
    k = 1 if isinstance(strategy, Forward) else strategy.k
    total = p
    for t in range(2, d + 1):
        total += min(k, math.comb(p, t - 1)) * (p - t + 1)
    return total


def _fits_per_evaluation(scoring) -> int:
    return scoring.folds if isinstance(scoring, InnerCV) else 1


def _check_budget(cfg: ExperimentConfig, p: int, rounds: int) -> None:
    per_round = 0
    for _, _spec in cfg.models:
        for strat in cfg.strategies:
            per_round += (
                _planned_evaluations(p, strat) * _fits_per_evaluation(cfg.scoring) + 1
            )
    total = per_round * rounds
    if total > cfg.max_model_fits:
        raise BudgetExceeded(
            f"experiment would fit about {total} models, above the cap of "
            f"{cfg.max_model_fits}; raise max_model_fits or shrink the search"
        )


def _scoring_for_round(scoring, master_seed: int, round_index: int):
    if isinstance(scoring, TrainResubstitution):
        return scoring
    return replace(scoring, seed=mix_seed(master_seed, round_index, 101))


def _spec_for_round(spec, master_seed: int, round_index: int):
    if isinstance(spec, LogRegL1) and spec.lam == "cv":
        return replace(spec, cv_seed=mix_seed(master_seed, round_index, 202))
    return spec


def _run_round(cfg: ExperimentConfig, round_index: int, train, test):
    """All (model, strategy) outcomes for one replication or outer fold."""
    outcomes = {}
    scoring = _scoring_for_round(cfg.scoring, cfg.master_seed, round_index)
    full = tuple(range(train.p))
    for model_name, spec in cfg.models:
        spec_r = _spec_for_round(spec, cfg.master_seed, round_index)
        scorer = Evaluator(spec_r, scoring).scorer(train)
        for strat in cfg.strategies:
            key = (model_name, strat.name)
            try:
                if isinstance(strat, AllFeatures):
                    idx = full
                elif isinstance(strat, Forward):
                    subset, _, _ = forward_selection(
                        train, scorer.evaluator, strat.d, scorer=scorer
                    )
                    idx = subset.indices
                else:
                    subset, _, _ = beam_search(
                        train, scorer.evaluator, strat.d, strat.k, scorer=scorer
                    )
                    idx = subset.indices
                cols = np.asarray(idx, dtype=np.intp)
                model = fit_arrays(
                    spec_r, train.features[:, cols], train.labels, train.n_classes
                )
                preds = model.predict_batch(test.features[:, cols])
                n_err = int(np.count_nonzero(preds != test.labels))
                outcomes[key] = ("ok", n_err / test.n, idx)
            except (FitError, SearchAborted) as exc:
                outcomes[key] = ("failed", str(exc), None)
    return outcomes


def _rounds_for_source(cfg: ExperimentConfig):
    """Yield (round_index, train, test) lazily; also returns p and count."""
    src = cfg.source
    if isinstance(src, SimulationSource):
        count = src.replications
        p = src.sim.p

        def make(r: int):
            pair = generate(replace(src.sim, seed=mix_seed(cfg.master_seed, r)))
            return pair.train, pair.test

    else:
        ds = load_csv(src.path, src.label_column, has_header=src.has_header)
        assign = stratified_kfold(ds, src.cv_folds, mix_seed(cfg.master_seed, 7))
        count = src.cv_folds
        p = ds.p

        def make(f: int):
            return ds.take_rows(assign.train_rows(f)), ds.take_rows(assign.test_rows(f))

    return count, p, make


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    count, p, make = _rounds_for_source(cfg)
    for strat in cfg.strategies:
        if not isinstance(strat, AllFeatures) and strat.d > p:
            raise ValueError(f"strategy {strat.name} asks for d={strat.d} > p={p}")
    _check_budget(cfg, p, count)

    def run_one(r: int):
        train, test = make(r)
        return _run_round(cfg, r, train, test)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            all_outcomes = list(pool.map(run_one, range(count)))
    else:
        all_outcomes = [run_one(r) for r in range(count)]

    cells = {}
    for model_name, _ in cfg.models:
        for strat in cfg.strategies:
            cells[(model_name, strat.name)] = CellResult(model_name, strat.name)
    for outcomes in all_outcomes:
        for key, (status, value, idx) in outcomes.items():
            cell = cells[key]
            if status == "ok":
                cell.rates.append(value)
                cell.subset_counts[idx] += 1
            else:
                cell.failures.append(value)

    warnings = []
    if count == 1:
        warnings.append("single replication: standard errors are reported as 0")
    metadata = {
        "source": _source_to_dict(cfg.source),
        "models": {name: spec_to_dict(spec) for name, spec in cfg.models},
        "strategies": [_strategy_to_dict(s) for s in cfg.strategies],
        "evaluator": scoring_to_dict(cfg.scoring),
        "seed": cfg.master_seed,
    }
    return ExperimentReport(
        model_names=tuple(name for name, _ in cfg.models),
        strategy_names=tuple(s.name for s in cfg.strategies),
        cells=cells,
        replications=count,
        metadata=metadata,
        warnings=warnings,
    )


def format_mean_se(mean: float, se: float) -> str:
    """Paper-style cell: three decimals, halves rounded away from zero."""

    def round3(x: float) -> str:
        return str(Decimal(repr(x)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))

    return f"{round3(mean)}({round3(se)})"


def emit_report(report: ExperimentReport, fmt: str, path) -> None:
    """Write the report as CSV rows or as a paper-style Markdown table."""
    if fmt == "csv":
        lines = ["model,strategy,mean,se,count,skipped_reason"]
        for model in report.model_names:
            for strategy in report.strategy_names:
                cell = report.cell(model, strategy)
                if cell.skipped:
                    reason = cell.skipped_reason.replace(",", ";").replace("\n", " ")
                    lines.append(f"{model},{strategy},,,0,{reason}")
                else:
                    lines.append(
                        f"{model},{strategy},{cell.mean:.17g},{cell.se:.17g},"
                        f"{cell.count},"
                    )
    elif fmt == "markdown":
        header = " | ".join(["strategy"] + list(report.model_names))
        sep = " | ".join(["---"] * (len(report.model_names) + 1))
        lines = [f"| {header} |", f"| {sep} |"]
        for strategy in report.strategy_names:
            row = [strategy]
            for model in report.model_names:
                cell = report.cell(model, strategy)
                row.append("—" if cell.skipped else format_mean_se(cell.mean, cell.se))
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
        lines.append(
            f"rounds={report.replications} seed={report.metadata['seed']} "
            f"evaluator={report.metadata['evaluator']}"
        )
        for name in report.model_names:
            lines.append(f"{name}: {report.metadata['models'][name]}")
    else:
        raise ValueError(f"unknown report format: {fmt!r} (use csv or markdown)")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# --- config serialization -------------------------------------------------

_SPEC_TYPES = {
    "knn": Knn,
    "lda": Lda,
    "qda": Qda,
    "svm_rbf": SvmRbf,
    "logreg_l1": LogRegL1,
}
_SPEC_NAMES = {cls: name for name, cls in _SPEC_TYPES.items()}
# config files say "lambda"; the dataclass field is `lam`
_FIELD_ALIASES = {"lambda": "lam"}


def spec_to_dict(spec) -> dict:
    out = {"type": _SPEC_NAMES[type(spec)]}
    for fname, value in vars(spec).items():
        key = "lambda" if fname == "lam" else fname
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def spec_from_dict(d: dict):
    d = dict(d)
    try:
        cls = _SPEC_TYPES[d.pop("type")]
    except KeyError as exc:
        raise ValueError(f"unknown or missing classifier type in {d!r}") from exc
    kwargs = {}
    for key, value in d.items():
        fname = _FIELD_ALIASES.get(key, key)
        if isinstance(value, list):
            value = tuple(value)
        kwargs[fname] = value
    return cls(**kwargs)


def scoring_to_dict(scoring) -> dict:
    if isinstance(scoring, TrainResubstitution):
        return {"scoring": "resubstitution"}
    if isinstance(scoring, Holdout):
        return {"scoring": "holdout", "fraction": scoring.fraction}
    if isinstance(scoring, InnerCV):
        return {"scoring": "inner_cv", "folds": scoring.folds}
    raise TypeError(f"unknown scoring: {scoring!r}")


def scoring_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("scoring", "inner_cv")
    if kind == "resubstitution":
        return TrainResubstitution()
    if kind == "holdout":
        return Holdout(fraction=d.get("fraction", 0.25))
    if kind == "inner_cv":
        return InnerCV(folds=d.get("folds", 5))
    raise ValueError(f"unknown scoring kind: {kind!r}")


def _strategy_to_dict(s: Strategy) -> dict:
    if isinstance(s, AllFeatures):
        return {"type": "all"}
    if isinstance(s, Forward):
        return {"type": "forward", "d": s.d}
    return {"type": "beam", "d": s.d, "k": s.k}


def strategy_from_dict(d: dict) -> Strategy:
    d = dict(d)
    kind = d.pop("type")
    if kind == "all":
        return AllFeatures(**d)
    if kind == "forward":
        return Forward(**d)
    if kind == "beam":
        return Beam(**d)
    raise ValueError(f"unknown strategy type: {kind!r}")


def _source_to_dict(src) -> dict:
    if isinstance(src, SimulationSource):
        sim = src.sim
        return {
            "kind": sim.kind,
            "n": sim.n,
            "p": sim.p,
            "m": sim.m,
            "replications": src.replications,
        }
    return {
        "path": str(src.path),
        "label_column": src.label_column,
        "cv_folds": src.cv_folds,
    }
