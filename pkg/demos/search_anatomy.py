"""Anatomy of one beam search on correlation-structured data.

Columns 0 and 1 separate the classes only through the sign of their
correlation, so each looks useless on its own; columns 2 and 3 carry a small
mean shift and look best individually. Forward selection follows the
individual ranking into the mediocre pair {2,3}. Beam search keeps several
candidate subsets alive, and whenever column 0 or 1 survives the first step
it discovers the pair {0,1}.
"""

import beamselect as bs
from beamselect.search import format_trace

pair = bs.generate(bs.SimConfig.sim2(n=500, seed=7))
evaluator = bs.Evaluator(bs.Qda(), bs.InnerCV(folds=5, seed=1))
scorer = evaluator.scorer(pair.train)

subset, score, trace = bs.beam_search(pair.train, evaluator, d=2, k=5, scorer=scorer)
print("beam search (k=5) selected", subset.indices, f"with CV score {score:.3f}")
print()
print(format_trace(trace))
print()

fwd_subset, fwd_score, _ = bs.forward_selection(pair.train, evaluator, d=2, scorer=scorer)
print("forward selection picked", fwd_subset.indices, f"with CV score {fwd_score:.3f}")

for name, chosen in [("beam", subset), ("forward", fwd_subset)]:
    model = bs.fit(bs.Qda(), bs.project(pair.train, chosen))
    rate = bs.misclassification_rate(model, bs.project(pair.test, chosen)).rate
    print(f"test misclassification with {name} subset {chosen.indices}: {rate:.3f}")

print()
print("exhaustive check over all 45 pairs:")
best, best_score = bs.exhaustive_search(pair.train, evaluator, d=2, scorer=scorer)
print("global CV optimum is", best.indices, f"at {best_score:.3f}")
