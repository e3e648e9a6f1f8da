"""Numerical evaluation of the uniform-deviation risk bounds, in log domain.

The probability bound is  min(1, 8 C(p,d) S e^{-n eps^2 / 128})  and the
expected-excess-risk bound is  16 sqrt(log(8 C(p,d) e S) / (2n)),  where S is
the n-th shatter coefficient of the classifier family. S is never computed
from classifier internals; callers supply log S directly or a VC dimension V,
which is converted through the Sauer-Shelah inequality S <= (n+1)^V.

The module also ships a small Monte-Carlo experiment - empirical risk
minimization over 1-D threshold classifiers on Gaussian columns - whose
population risks have closed forms, so the bounds can be checked against
observed excess risks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtr

from .rng import RandomStream

__all__ = [
    "BoundInputs",
    "log_binomial",
    "vc_probability_bound",
    "excess_risk_bound",
    "ThresholdClass",
    "GaussianColumnsDGP",
    "empirical_excess_risk",
]


def log_binomial(p: int, d: int) -> float:
    """ln C(p, d) via log-gamma; exact to double precision for small p.

    The two gamma terms are added before subtracting, which makes the
    d <-> p-d symmetry hold bit for bit.
    """
    if d < 0 or p < 0:
        raise ValueError("p and d must be nonnegative")
    if d > p:
        raise ValueError(f"d={d} exceeds p={p}")
    return float(gammaln(p + 1) - (gammaln(d + 1) + gammaln(p - d + 1)))


@dataclass(frozen=True)
class BoundInputs:
    """Sample size, subset-count factor, shatter coefficient, and epsilon."""

    n: int
    p: int
    d: int
    log_shatter: float
    epsilon: float = 0.1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.d <= self.p:
            raise ValueError("need 0 < d <= p")
        if self.log_shatter < 0:
            raise ValueError("log_shatter must be nonnegative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def from_vc_dimension(cls, n, p, d, vc_dim, epsilon=0.1) -> "BoundInputs":
        """Sauer-Shelah upper bound: log S <= V log(n+1)."""
        if vc_dim < 0:
            raise ValueError("VC dimension must be nonnegative")
        return cls(n=n, p=p, d=d, log_shatter=vc_dim * math.log(n + 1), epsilon=epsilon)


def vc_probability_bound(b: BoundInputs) -> float:
    """P(excess risk > epsilon) bound, clamped to [0, 1]."""
    log_val = (
        math.log(8.0)
        + log_binomial(b.p, b.d)
        + b.log_shatter
        - b.n * b.epsilon * b.epsilon / 128.0
    )
    if log_val >= 0.0:
        return 1.0
    return math.exp(log_val)


def excess_risk_bound(b: BoundInputs) -> float:
    """Bound on E[risk of the empirical minimizer] - best risk in the class."""
    log_term = math.log(8.0) + log_binomial(b.p, b.d) + 1.0 + b.log_shatter
    return 16.0 * math.sqrt(log_term / (2.0 * b.n))


@dataclass(frozen=True)
class ThresholdClass:
    """1-D threshold rules on a fixed grid.

    Orientation 0 predicts class 1 where x > t; orientation 1 predicts
    class 1 where x <= t. Combined with a column choice this is a finite
    classifier family of len(thresholds) * len(orientations) rules per
    column.
    """

    thresholds: tuple[float, ...]
    orientations: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        th = tuple(float(t) for t in self.thresholds)
        if not th:
            raise ValueError("need at least one threshold")
        if any(a >= b for a, b in zip(th, th[1:])):
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", th)
        ors = tuple(int(o) for o in self.orientations)
        if not ors or any(o not in (0, 1) for o in ors) or len(set(ors)) != len(ors):
            raise ValueError("orientations must be a subset of (0, 1)")
        object.__setattr__(self, "orientations", ors)

    @property
    def size(self) -> int:
        return len(self.orientations) * len(self.thresholds)

    @property
    def log_size(self) -> float:
        return math.log(self.size)


@dataclass(frozen=True)
class GaussianColumnsDGP:
    """Equal-prior classes; column j is N(mean0[j], 1) or N(mean1[j], 1)."""

    means0: tuple[float, ...]
    means1: tuple[float, ...]

    def __post_init__(self):
        m0 = tuple(float(x) for x in self.means0)
        m1 = tuple(float(x) for x in self.means1)
        if len(m0) != len(m1) or not m0:
            raise ValueError("means0 and means1 must be equal-length and non-empty")
        object.__setattr__(self, "means0", m0)
        object.__setattr__(self, "means1", m1)

    @property
    def p(self) -> int:
        return len(self.means0)

    def population_risks(self, cls: ThresholdClass) -> np.ndarray:
        """Exact risk of every (column, threshold, orientation) rule.

        Shape (p, T, n_orientations); orientation 0 predicts class 1 above
        the threshold, with risk (P0(x > t) + P1(x <= t)) / 2, and
        orientation 1 is its complement.
        """
        t = np.asarray(cls.thresholds)
        m0 = np.asarray(self.means0)[:, None]
        m1 = np.asarray(self.means1)[:, None]
        above = 0.5 * ((1.0 - ndtr(t - m0)) + ndtr(t - m1))
        both = {0: above, 1: 1.0 - above}
        return np.stack([both[o] for o in cls.orientations], axis=2)

    def sample(self, n: int, stream: RandomStream):
        """n i.i.d. samples with fair-coin labels."""
        y = (stream.random(n) < 0.5).astype(np.int64)
        X = stream.normal((n, self.p))
        means = np.where(y[:, None] == 0, np.asarray(self.means0), np.asarray(self.means1))
        return X + means, y


def _erm_threshold(X, y, cls: ThresholdClass):
    """Empirical-risk minimizer over (column, threshold, orientation).

    Ties break lexicographically in that order. Counting is done per column
    with sorted class values, so the scan is O(n log n + T) per column.
    """
    n, p = X.shape
    t = np.asarray(cls.thresholds)
    n1 = int(y.sum())
    n0 = n - n1
    best = None
    for j in range(p):
        x0 = np.sort(X[y == 0, j])
        x1 = np.sort(X[y == 1, j])
        # errors of "predict 1 above t": class-0 points above t, class-1 at or below
        err_above = (n0 - np.searchsorted(x0, t, side="right")) + np.searchsorted(
            x1, t, side="right"
        )
        for ti in range(t.size):
            for oi, orient in enumerate(cls.orientations):
                e = err_above[ti] if orient == 0 else n - err_above[ti]
                key = (e, j, ti, oi)
                if best is None or key < best:
                    best = key
    return best[1], best[2], best[3]


def empirical_excess_risk(
    trials: int,
    dgp: GaussianColumnsDGP,
    cls: ThresholdClass,
    n: int,
    seed: int = 0,
    epsilons: tuple[float, ...] = (),
):
    """Monte-Carlo excess risk of empirical risk minimization over the
    threshold family with column selection (d = 1).

    Returns (mean, standard error, exceed_freqs) where exceed_freqs[i] is the
    fraction of trials with excess risk above epsilons[i].
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    pop = dgp.population_risks(cls)
    inf_risk = float(pop.min())
    excesses = np.empty(trials)
    master = RandomStream((int(seed), 31))
    for r in range(trials):
        X, y = dgp.sample(n, master.child(r))
        j, ti, orient = _erm_threshold(X, y, cls)
        excesses[r] = pop[j, ti, orient] - inf_risk
    mean = float(excesses.mean())
    se = float(excesses.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    freqs = tuple(float((excesses > e).mean()) for e in epsilons)
    return mean, se, freqs
