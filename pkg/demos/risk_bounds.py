"""The uniform-deviation risk bounds, and a case where they can be checked.

The probability bound 8 C(p,d) S(C,n) exp(-n eps^2/128) and the
expected-excess-risk bound 16 sqrt(log(8 C(p,d) e S)/(2n)) hold for
empirical risk minimization over any classifier family with shatter
coefficient S and any choice among the C(p,d) feature subsets. For a tiny
finite family - threshold rules on a grid, over Gaussian columns - the
population risks have closed forms, so the actual excess risk of ERM is
computable and the bounds can be watched doing their job (loosely).
"""

import numpy as np

from beamselect import (
    BoundInputs,
    GaussianColumnsDGP,
    ThresholdClass,
    empirical_excess_risk,
    excess_risk_bound,
    vc_probability_bound,
)

print("probability bound as n grows (p=10, d=2, VC dim 1, eps=0.1):")
for n in (10_000, 100_000, 300_000, 1_000_000, 3_000_000):
    b = BoundInputs.from_vc_dimension(n=n, p=10, d=2, vc_dim=1, epsilon=0.1)
    print(f"  n={n:>9,}: P(excess > 0.1) <= {vc_probability_bound(b):.3e}")

print()
print("excess-risk bound vs observed mean excess for a 22-rule class")
cls = ThresholdClass(thresholds=tuple(np.linspace(-2.0, 2.0, 11)))
dgp = GaussianColumnsDGP(means0=(0.5, 0.0, 0.0), means1=(-0.5, 0.0, 0.0))
print(f"(one signal column among {dgp.p}, {cls.size} rules per column)")
for n in (100, 1_000, 10_000):
    mean, se, _ = empirical_excess_risk(trials=100, dgp=dgp, cls=cls, n=n, seed=3)
    bound = excess_risk_bound(BoundInputs(n=n, p=dgp.p, d=1, log_shatter=cls.log_size))
    print(f"  n={n:>6}: observed {mean:.4f} (se {se:.4f})  <=  bound {bound:.4f}")

print()
print("the bound is distribution-free and union-bounded, so it is loose;")
print("what matters is that it shrinks at the sqrt(log/n) rate the theory gives")
