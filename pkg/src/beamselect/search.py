"""Subset search: beam search, forward selection, and an exhaustive oracle.

Candidates are ranked by the total order (score ascending, subset
lexicographic ascending), which makes every search deterministic. A step's
candidate pool is every parent extended by every feature it lacks; children
seen twice are deduplicated before evaluation, and candidates whose
evaluation raises :class:`FitError` are discarded with a trace note.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .classifiers import FitError, Knn, LogRegL1, SvmRbf, fit_arrays
from .classifiers.knn import cv_error_knn
from .classifiers.logistic import _machine_targets, lambda_grid_for, path_cv_errors
from .classifiers.svm import cv_error_svm
from .data import FeatureSubset, LabeledDataset, holdout_rows, stratified_kfold

__all__ = [
    "TrainResubstitution",
    "Holdout",
    "InnerCV",
    "Evaluator",
    "SubsetScorer",
    "BeamState",
    "StepStats",
    "SearchTrace",
    "SearchAborted",
    "BudgetExceeded",
    "beam_search",
    "forward_selection",
    "exhaustive_search",
    "format_trace",
]


class SearchAborted(RuntimeError):
    """Every candidate at some step failed to evaluate."""


class BudgetExceeded(RuntimeError):
    """The operation would exceed its configured model-fit budget."""


@dataclass(frozen=True)
class TrainResubstitution:
    """Score a subset by training error on the full dataset."""


@dataclass(frozen=True)
class Holdout:
    """Score on one stratified holdout; `fraction` is the held-out share."""

    fraction: float = 0.25
    seed: int = 0


@dataclass(frozen=True)
class InnerCV:
    """Score by pooled stratified K-fold cross-validation error."""

    folds: int = 5
    seed: int = 0


Scoring = TrainResubstitution | Holdout | InnerCV


@dataclass(frozen=True)
class Evaluator:
    """A classifier spec plus the data policy used to score subsets."""

    spec: object
    scoring: Scoring = InnerCV()

    def scorer(self, ds: LabeledDataset) -> "SubsetScorer":
        return SubsetScorer(self, ds)


class SubsetScorer:
    """Evaluator bound to one dataset, with split reuse and score caching.

    Scores are memoized by subset so that, e.g., a forward pass after a beam
    pass over the same data re-fits nothing.
    """

    def __init__(self, evaluator: Evaluator, ds: LabeledDataset):
        self.evaluator = evaluator
        self.ds = ds
        self._cache: dict[tuple[int, ...], float] = {}
        scoring = evaluator.scoring
        if isinstance(scoring, TrainResubstitution):
            rows = np.arange(ds.n)
            self._splits = [(rows, rows)]
        elif isinstance(scoring, Holdout):
            kept, held = holdout_rows(ds, scoring.fraction, scoring.seed)
            self._splits = [(kept, held)]
        elif isinstance(scoring, InnerCV):
            assign = stratified_kfold(ds, scoring.folds, scoring.seed)
            self._splits = [
                (assign.train_rows(f), assign.test_rows(f))
                for f in range(scoring.folds)
            ]
        else:
            raise TypeError(f"unknown scoring variant: {scoring!r}")
        # a CV-selected-lambda logistic under CV scoring reuses the scorer's
        # own folds to score the whole penalty path in one pass per fold
        self._cv_logistic = isinstance(evaluator.spec, LogRegL1) and (
            evaluator.spec.lam == "cv" and isinstance(scoring, InnerCV)
        )

    def score_tuple(self, idx: tuple[int, ...]) -> float:
        cached = self._cache.get(idx)
        if cached is not None:
            return cached
        cols = np.asarray(idx, dtype=np.intp)
        Xsub = self.ds.features[:, cols]
        y = self.ds.labels
        C = self.ds.n_classes
        spec = self.evaluator.spec
        if self._cv_logistic:
            grid = spec.lambda_grid or lambda_grid_for(Xsub, _machine_targets(y, C))
            # ranking only needs ~1/n score resolution, so the path may run
            # at a looser tolerance than a final model fit
            errors = path_cv_errors(
                Xsub, y, C, list(grid), self._splits,
                spec.max_iter, max(spec.tol, 1e-5),
            )
            n_tot = sum(te.size for _, te in self._splits)
            score = float(errors.min()) / n_tot
        elif isinstance(spec, Knn):
            n_err, n_tot = cv_error_knn(spec, Xsub, y, C, self._splits)
            score = n_err / n_tot
        elif isinstance(spec, SvmRbf):
            n_err, n_tot = cv_error_svm(spec, Xsub, y, C, self._splits)
            score = n_err / n_tot
        else:
            n_err = 0
            n_tot = 0
            for fit_rows, eval_rows in self._splits:
                model = fit_arrays(spec, Xsub[fit_rows], y[fit_rows], C)
                preds = model.predict_batch(Xsub[eval_rows])
                n_err += int(np.count_nonzero(preds != y[eval_rows]))
                n_tot += eval_rows.size
            score = n_err / n_tot
        self._cache[idx] = score
        return score

    def score(self, subset: FeatureSubset) -> float:
        return self.score_tuple(subset.indices)


@dataclass(frozen=True)
class BeamState:
    """The best candidates of one step, sorted by (score, subset)."""

    step: int
    candidates: tuple[tuple[FeatureSubset, float], ...]


@dataclass(frozen=True)
class StepStats:
    step: int
    generated: int
    duplicates: int
    evaluated: int
    failed: int


@dataclass
class SearchTrace:
    """Everything a search did: beams, counts, and discarded candidates."""

    states: list[BeamState] = field(default_factory=list)
    steps: list[StepStats] = field(default_factory=list)
    failures: list[tuple[int, FeatureSubset, str]] = field(default_factory=list)
    models_fitted: int = 0
    duplicates_discarded: int = 0


def beam_search(ds: LabeledDataset, ev: Evaluator, d: int, k: int, scorer=None):
    """Best size-d subset found keeping the k best candidates per step.

    Returns (subset, score, trace). Candidates failing to evaluate are
    dropped with a note; a step where everything fails aborts the search.
    """
    p = ds.p
    if not 1 <= d <= p:
        raise ValueError(f"d must lie in [1, {p}]")
    if k < 1:
        raise ValueError("beam width k must be at least 1")
    if scorer is None:
        scorer = ev.scorer(ds)
    trace = SearchTrace()
    parents: list[tuple[int, ...]] = [()]
    beam: list[tuple[float, tuple[int, ...]]] = []
    for t in range(1, d + 1):
        generated = 0
        duplicates = 0
        failed = 0
        seen: set[tuple[int, ...]] = set()
        scored: list[tuple[float, tuple[int, ...]]] = []
        for parent in parents:
            members = set(parent)
            for j in range(p):
                if j in members:
                    continue
                child = tuple(sorted(parent + (j,)))
                generated += 1
                if child in seen:
                    duplicates += 1
                    continue
                seen.add(child)
                trace.models_fitted += 1
                try:
                    s = scorer.score_tuple(child)
                except FitError as exc:
                    failed += 1
                    trace.failures.append((t, FeatureSubset(child), str(exc)))
                    continue
                scored.append((s, child))
        trace.duplicates_discarded += duplicates
        trace.steps.append(
            StepStats(t, generated, duplicates, generated - duplicates, failed)
        )
        if not scored:
            raise SearchAborted(
                f"all {generated - duplicates} candidates failed at step {t}; "
                f"last failure: {trace.failures[-1][2] if trace.failures else 'none'}"
            )
        scored.sort(key=lambda sc: (sc[0], sc[1]))
        beam = scored[:k]
        trace.states.append(
            BeamState(t, tuple((FeatureSubset(c), s) for s, c in beam))
        )
        parents = [c for _, c in beam]
    best_score, best = beam[0]
    return FeatureSubset(best), best_score, trace


def forward_selection(ds: LabeledDataset, ev: Evaluator, d: int, scorer=None):
    """Beam search with width 1: add the single best feature at each step."""
    return beam_search(ds, ev, d, k=1, scorer=scorer)


def exhaustive_search(
    ds: LabeledDataset, ev: Evaluator, d: int, budget: int = 10**6, scorer=None
):
    """Global minimum of the score over all size-d subsets (ties: lexicographic)."""
    p = ds.p
    if not 1 <= d <= p:
        raise ValueError(f"d must lie in [1, {p}]")
    total = math.comb(p, d)
    if total > budget:
        raise BudgetExceeded(
            f"C({p},{d}) = {total} subsets exceeds the budget of {budget}"
        )
    if scorer is None:
        scorer = ev.scorer(ds)
    best: tuple[float, tuple[int, ...]] | None = None
    for combo in itertools.combinations(range(p), d):
        try:
            s = scorer.score_tuple(combo)
        except FitError:
            continue
        if best is None or (s, combo) < best:
            best = (s, combo)
    if best is None:
        raise SearchAborted(f"every size-{d} subset failed to evaluate")
    return FeatureSubset(best[1]), best[0]


def format_trace(trace: SearchTrace) -> str:
    """One beam per line: step, counters, then subset:score pairs."""
    lines = []
    for stats, state in zip(trace.steps, trace.states):
        cells = " | ".join(
            ",".join(str(i) for i in sub.indices) + f":{score!r}"
            for sub, score in state.candidates
        )
        lines.append(
            f"step={stats.step} generated={stats.generated} "
            f"duplicates={stats.duplicates} failed={stats.failed} | {cells}"
        )
    lines.append(
        f"total models_fitted={trace.models_fitted} "
        f"duplicates_discarded={trace.duplicates_discarded}"
    )
    return "\n".join(lines)
