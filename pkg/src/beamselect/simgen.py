"""Seeded generators for the three simulation settings, plus a Bayes-risk oracle.

Each generator is a pure function of its :class:`SimConfig`: the same config
produces bit-identical train/test pairs on any platform. Both matrices are
n x p with the first n/2 rows labeled 0 and the last n/2 labeled 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .data import LabeledDataset
from .rng import RandomStream

__all__ = [
    "SimConfig",
    "SimPair",
    "generate",
    "gen_sim1",
    "gen_sim2",
    "gen_sim3",
    "sim1_bayes_risk",
]

KINDS = ("sim1", "sim2", "sim3")


@dataclass(frozen=True)
class SimConfig:
    """Which simulation to draw, its dimensions, and the stream seed."""

    kind: str
    n: int = 500
    p: int = 100
    m: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.n < 2 or self.n % 2:
            raise ValueError("n must be a positive even number")
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.kind == "sim1" and not 0 <= self.m <= self.p:
            raise ValueError("sim1 requires 0 <= m <= p")
        if self.kind in ("sim2", "sim3") and self.p < 4:
            raise ValueError(f"{self.kind} requires p >= 4")

    @classmethod
    def sim1(cls, n=500, p=100, m=5, seed=0):
        return cls("sim1", n=n, p=p, m=m, seed=seed)

    @classmethod
    def sim2(cls, n=500, p=10, seed=0):
        return cls("sim2", n=n, p=p, m=0, seed=seed)

    @classmethod
    def sim3(cls, n=500, p=10, seed=0):
        return cls("sim3", n=n, p=p, m=0, seed=seed)


@dataclass(frozen=True)
class SimPair:
    """A train/test pair drawn from one replication of a simulation.

    `signal` carries the (u, v) mean vectors for sim1 (None otherwise); they
    are drawn once per replication and shared by the train and test matrices.
    """

    train: LabeledDataset
    test: LabeledDataset
    signal: tuple[np.ndarray, np.ndarray] | None = None


def _half_labels(n: int) -> np.ndarray:
    y = np.zeros(n, dtype=np.int64)
    y[n // 2 :] = 1
    return y


def gen_sim1(cfg: SimConfig) -> SimPair:
    """Gaussian mean-shift setting: m signal columns, p-m pure noise columns.

    Signal column j is N(u_j, 1) for class 0 and N(v_j, 1) for class 1 with
    u_j ~ U(0,1) and v_j ~ U(-1,0) drawn once per replication.
    """
    if cfg.kind != "sim1":
        raise ValueError("config is not a sim1 config")
    stream = RandomStream((cfg.seed, 11))
    n, p, m = cfg.n, cfg.p, cfg.m
    u = stream.uniform(0.0, 1.0, m)
    v = stream.uniform(-1.0, 0.0, m)
    mean = np.zeros((n, p))
    mean[: n // 2, :m] = u
    mean[n // 2 :, :m] = v
    y = _half_labels(n)
    train = LabeledDataset(stream.normal((n, p)) + mean, y)
    test = LabeledDataset(stream.normal((n, p)) + mean, y)
    return SimPair(train, test, signal=(u, v))


def _correlated_pair(stream: RandomStream, rows: int, rho: float) -> np.ndarray:
    z = stream.normal((rows, 2))
    out = np.empty((rows, 2))
    out[:, 0] = z[:, 0]
    out[:, 1] = rho * z[:, 0] + np.sqrt(1.0 - rho * rho) * z[:, 1]
    return out


def gen_sim2(cfg: SimConfig) -> SimPair:
    """Correlation-sign setting: columns (0,1) are bivariate normal with
    correlation +0.9 for class 0 and -0.9 for class 1, columns (2,3) are
    N(+-0.3, 1), and the rest are standard normal noise."""
    if cfg.kind != "sim2":
        raise ValueError("config is not a sim2 config")
    stream = RandomStream((cfg.seed, 12))
    n, p = cfg.n, cfg.p
    h = n // 2
    y = _half_labels(n)

    def one_matrix():
        X = np.empty((n, p))
        X[:h, :2] = _correlated_pair(stream, h, 0.9)
        X[h:, :2] = _correlated_pair(stream, h, -0.9)
        X[:h, 2:4] = stream.normal((h, 2)) + 0.3
        X[h:, 2:4] = stream.normal((h, 2)) - 0.3
        if p > 4:
            X[:, 4:] = stream.normal((n, p - 4))
        return X

    return SimPair(LabeledDataset(one_matrix(), y), LabeledDataset(one_matrix(), y))


def _half_square(stream: RandomStream, rows: int, keep_above: bool) -> np.ndarray:
    """Uniform points in (-3,3)^2 with x+y > -0.2 (keep_above) or x+y < 0.2,
    by rejection from the square; the region covers just over half of it."""
    out = np.empty((rows, 2))
    filled = 0
    while filled < rows:
        need = rows - filled
        batch = int(need * 1.9) + 8
        x = stream.uniform(-3.0, 3.0, batch)
        yv = stream.uniform(-3.0, 3.0, batch)
        s = x + yv
        ok = s > -0.2 if keep_above else s < 0.2
        take = min(int(ok.sum()), need)
        out[filled : filled + take, 0] = x[ok][:take]
        out[filled : filled + take, 1] = yv[ok][:take]
        filled += take
    return out


def gen_sim3(cfg: SimConfig) -> SimPair:
    """Linear-boundary setting: columns (0,1) are uniform on overlapping
    half-squares split by x+y = -+0.2, columns (2,3) are U(-1,3) vs U(-3,1),
    and the rest are standard normal noise."""
    if cfg.kind != "sim3":
        raise ValueError("config is not a sim3 config")
    stream = RandomStream((cfg.seed, 13))
    n, p = cfg.n, cfg.p
    h = n // 2
    y = _half_labels(n)

    def one_matrix():
        X = np.empty((n, p))
        X[:h, :2] = _half_square(stream, h, keep_above=True)
        X[h:, :2] = _half_square(stream, h, keep_above=False)
        X[:h, 2:4] = stream.uniform(-1.0, 3.0, (h, 2))
        X[h:, 2:4] = stream.uniform(-3.0, 1.0, (h, 2))
        if p > 4:
            X[:, 4:] = stream.normal((n, p - 4))
        return X

    return SimPair(LabeledDataset(one_matrix(), y), LabeledDataset(one_matrix(), y))


_GENERATORS = {"sim1": gen_sim1, "sim2": gen_sim2, "sim3": gen_sim3}


def generate(cfg: SimConfig) -> SimPair:
    """Dispatch to the generator named by cfg.kind."""
    return _GENERATORS[cfg.kind](cfg)


def sim1_bayes_risk(u, v) -> float:
    """Optimal misclassification risk for equal-prior N(u, I) vs N(v, I).

    The best rule thresholds the projection onto u - v, giving risk
    Phi(-||u - v|| / 2); it lies in [0, 1/2] and is 1/2 when u = v.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError("u and v must have the same length")
    return float(ndtr(-np.linalg.norm(u - v) / 2.0))
