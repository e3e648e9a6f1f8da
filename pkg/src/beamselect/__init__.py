"""Beam-search wrapper feature selection for classification.

The package bundles five from-scratch classifiers, beam/forward/exhaustive
subset search, seeded simulation generators, uniform-deviation risk-bound
calculators, and an experiment harness that reproduces the simulation tables.
"""

from .bounds import (
    BoundInputs,
    GaussianColumnsDGP,
    ThresholdClass,
    empirical_excess_risk,
    excess_risk_bound,
    log_binomial,
    vc_probability_bound,
)
from .classifiers import (
    DegenerateCovariance,
    FitError,
    Knn,
    Lda,
    LogRegL1,
    Qda,
    RiskEstimate,
    SvmRbf,
    cv_select_lambda,
    fit,
    misclassification_rate,
    predict,
)
from .data import (
    FeatureSubset,
    FoldAssignment,
    LabeledDataset,
    load_csv,
    project,
    save_csv,
    split_holdout,
    stratified_kfold,
)
from .experiments import (
    AllFeatures,
    Beam,
    CsvSource,
    ExperimentConfig,
    ExperimentReport,
    Forward,
    SimulationSource,
    emit_report,
    mix_seed,
    run_experiment,
)
from .rng import RandomStream
from .search import (
    BeamState,
    BudgetExceeded,
    Evaluator,
    Holdout,
    InnerCV,
    SearchAborted,
    SearchTrace,
    TrainResubstitution,
    beam_search,
    exhaustive_search,
    format_trace,
    forward_selection,
)
from .simgen import (
    SimConfig,
    SimPair,
    gen_sim1,
    gen_sim2,
    gen_sim3,
    generate,
    sim1_bayes_risk,
)

__version__ = "0.1.0"
