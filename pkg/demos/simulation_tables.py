"""Small-scale rehearsal of the three simulation tables.

Runs every (classifier, feature-strategy) cell with 8 replications instead
of 50 so the whole script finishes in a few minutes on one core. The
checked-in configs under configs/ run the full-size versions through the
CLI, e.g.

    beamselect simulate --config configs/sim2.yaml --output results/sim2.csv
"""

import time

import beamselect as bs

MODELS = (
    ("knn", bs.Knn()),
    ("lda", bs.Lda()),
    ("qda", bs.Qda()),
    ("svm", bs.SvmRbf()),
    ("logistic", bs.LogRegL1()),
)

SETTINGS = [
    ("simulation 1 (mean-shift signals)", bs.SimConfig.sim1(n=500, p=100, m=5), 5),
    ("simulation 2 (correlation-sign pair)", bs.SimConfig.sim2(n=500, p=10), 2),
    ("simulation 3 (jointly linear pair)", bs.SimConfig.sim3(n=500, p=10), 2),
]

for title, sim, d in SETTINGS:
    t0 = time.time()
    cfg = bs.ExperimentConfig(
        source=bs.SimulationSource(sim=sim, replications=8),
        models=MODELS,
        strategies=(bs.AllFeatures(), bs.Forward(d=d), bs.Beam(d=d, k=5)),
        scoring=bs.InnerCV(folds=5),
        master_seed=1,
    )
    report = bs.run_experiment(cfg)
    print(f"== {title}: d={d}, k=5, 8 replications "
          f"({time.time() - t0:.0f}s) ==")
    header = ["strategy"] + list(report.model_names)
    print(" | ".join(h.ljust(12) for h in header))
    for strategy in report.strategy_names:
        row = [strategy]
        for model in report.model_names:
            cell = report.cell(model, strategy)
            row.append(bs.experiments.format_mean_se(cell.mean, cell.se))
        print(" | ".join(c.ljust(12) for c in row))
    beam_cell = report.cell("qda", "beam")
    print("qda beam subset frequencies:", dict(beam_cell.subset_counts.most_common(3)))
    print()
