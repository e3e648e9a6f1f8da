import math

import mpmath as mp
import numpy as np
import pytest

from beamselect.bounds import (
    BoundInputs,
    GaussianColumnsDGP,
    ThresholdClass,
    empirical_excess_risk,
    excess_risk_bound,
    log_binomial,
    vc_probability_bound,
)

mp.mp.dps = 50


def mp_probability_bound(n, p, d, log_shatter, eps):
    val = (
        mp.log(8)
        + mp.log(mp.binomial(p, d))
        + mp.mpf(log_shatter)
        - mp.mpf(n) * mp.mpf(eps) ** 2 / 128
    )
    return min(mp.mpf(1), mp.e**val)


def mp_excess_bound(n, p, d, log_shatter):
    inner = mp.log(8) + mp.log(mp.binomial(p, d)) + 1 + mp.mpf(log_shatter)
    return 16 * mp.sqrt(inner / (2 * mp.mpf(n)))


class TestLogBinomial:
    def test_small_cases_exact(self):
        assert log_binomial(4, 2) == pytest.approx(math.log(6), rel=1e-14)
        assert log_binomial(6, 0) == 0.0
        assert log_binomial(6, 6) == 0.0

    def test_large_case_matches_integer_oracle(self):
        # C(100,5) = 75,287,520 exactly
        want = math.log(math.comb(100, 5))
        assert math.comb(100, 5) == 75_287_520
        assert log_binomial(100, 5) == pytest.approx(want, rel=1e-13)

    def test_symmetry_is_exact(self):
        for p, d in [(100, 5), (17, 3), (1000, 499), (8, 8)]:
            assert log_binomial(p, d) == log_binomial(p, p - d)

    def test_d_above_p_rejected(self):
        with pytest.raises(ValueError):
            log_binomial(3, 4)


class TestProbabilityBound:
    def test_monotone_decreasing_in_epsilon(self):
        vals = [
            vc_probability_bound(
                BoundInputs(n=5000, p=20, d=3, log_shatter=5.0, epsilon=e)
            )
            for e in (0.05, 0.1, 0.2, 0.4, 0.8)
        ]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < vals[0]

    def test_clamped_to_one(self):
        b = BoundInputs(n=1, p=5, d=2, log_shatter=0.0, epsilon=1e-6)
        assert vc_probability_bound(b) == 1.0

    def test_worked_example_against_multiprecision(self):
        # n=12800, p=10, d=2, S=(n+1)^1, eps=0.1: exponent collapses to
        # ln 8 + ln 45 + ln 12801 - 10; stays below 1
        b = BoundInputs.from_vc_dimension(n=12800, p=10, d=2, vc_dim=1, epsilon=0.1)
        got = vc_probability_bound(b)
        want = float(mp_probability_bound(12800, 10, 2, math.log(12801), 0.1))
        assert got == pytest.approx(want, rel=1e-12)

    def test_random_parameters_match_multiprecision(self):
        rng = np.random.default_rng(2718)
        for _ in range(50):
            n = int(rng.integers(1, 10**6))
            p = int(rng.integers(1, 500))
            d = int(rng.integers(1, p + 1))
            v = int(rng.integers(0, 6))
            eps = float(rng.uniform(0.01, 1.0))
            b = BoundInputs.from_vc_dimension(n=n, p=p, d=d, vc_dim=v, epsilon=eps)
            got = vc_probability_bound(b)
            want = float(mp_probability_bound(n, p, d, v * math.log(n + 1), eps))
            assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


class TestExcessRiskBound:
    def test_worked_example(self):
        b = BoundInputs(n=128, p=7, d=7, log_shatter=0.0)
        want = 16.0 * math.sqrt((math.log(8.0) + 1.0) / 256.0)
        assert excess_risk_bound(b) == pytest.approx(want, rel=1e-14)
        # 16 sqrt((ln 8 + 1)/256) = 1.754833764685372 by 30-digit evaluation
        assert want == pytest.approx(1.754834, abs=5e-7)

    def test_monotone_decreasing_in_n(self):
        vals = [
            excess_risk_bound(BoundInputs(n=n, p=30, d=4, log_shatter=3.0))
            for n in (10, 100, 1000, 10**6)
        ]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_doubling_subset_count_strictly_increases(self):
        base = BoundInputs(n=1000, p=10, d=2, log_shatter=2.0)
        doubled = BoundInputs(n=1000, p=10, d=2, log_shatter=2.0 + math.log(2.0))
        assert excess_risk_bound(doubled) > excess_risk_bound(base)

    def test_random_parameters_match_multiprecision(self):
        rng = np.random.default_rng(314)
        for _ in range(50):
            n = int(rng.integers(1, 10**9))
            p = int(rng.integers(1, 1000))
            d = int(rng.integers(1, p + 1))
            ls = float(rng.uniform(0.0, 50.0))
            got = excess_risk_bound(BoundInputs(n=n, p=p, d=d, log_shatter=ls))
            want = float(mp_excess_bound(n, p, d, ls))
            assert got == pytest.approx(want, rel=1e-10)

    def test_no_overflow_at_extreme_sizes(self):
        b = BoundInputs(n=10**9, p=10**6, d=10**3, log_shatter=1e4, epsilon=1e-3)
        assert math.isfinite(excess_risk_bound(b))
        assert 0.0 <= vc_probability_bound(b) <= 1.0


class TestThresholdExperiment:
    def test_single_classifier_class_has_zero_excess(self):
        cls = ThresholdClass(thresholds=(0.0,), orientations=(0,))
        dgp = GaussianColumnsDGP(means0=(0.7,), means1=(-0.7,))
        mean, se, _ = empirical_excess_risk(trials=20, dgp=dgp, cls=cls, n=50, seed=1)
        assert mean == 0.0 and se == 0.0

    def test_excess_is_nonnegative_every_trial(self):
        cls = ThresholdClass(thresholds=tuple(np.linspace(-2, 2, 9)))
        dgp = GaussianColumnsDGP(means0=(0.5, 0.0, 0.0), means1=(-0.5, 0.0, 0.0))
        pop = dgp.population_risks(cls)
        assert pop.shape == (3, 9, 2)
        mean, se, freqs = empirical_excess_risk(
            trials=50, dgp=dgp, cls=cls, n=40, seed=3, epsilons=(0.0,)
        )
        # excess > 0 happens sometimes but the mean stays small and the
        # frequency of strictly negative excess is zero by construction
        assert mean >= 0.0
        assert 0.0 <= freqs[0] <= 1.0

    def test_population_risks_are_exact_for_noise_columns(self):
        cls = ThresholdClass(thresholds=(-1.0, 0.0, 1.0))
        dgp = GaussianColumnsDGP(means0=(0.0,), means1=(0.0,))
        pop = dgp.population_risks(cls)
        np.testing.assert_allclose(pop, 0.5, atol=1e-15)

    def test_large_n_drives_excess_below_bound(self):
        cls = ThresholdClass(thresholds=tuple(np.linspace(-2, 2, 21)))
        dgp = GaussianColumnsDGP(means0=(0.6, 0.0, 0.0), means1=(-0.6, 0.0, 0.0))
        n = 10_000
        mean, se, _ = empirical_excess_risk(trials=60, dgp=dgp, cls=cls, n=n, seed=5)
        bound = excess_risk_bound(
            BoundInputs(n=n, p=3, d=1, log_shatter=cls.log_size)
        )
        assert mean < 0.02
        assert mean <= bound

    def test_probability_bound_never_violated(self):
        cls = ThresholdClass(thresholds=tuple(np.linspace(-2, 2, 11)))
        dgp = GaussianColumnsDGP(means0=(0.5, 0.0), means1=(-0.5, 0.0))
        eps = (0.05, 0.1, 0.2)
        trials = 200
        mean, se, freqs = empirical_excess_risk(
            trials=trials, dgp=dgp, cls=cls, n=2000, seed=7, epsilons=eps
        )
        for e, freq in zip(eps, freqs):
            bound = vc_probability_bound(
                BoundInputs(n=2000, p=2, d=1, log_shatter=cls.log_size, epsilon=e)
            )
            slack = 3.0 * math.sqrt(max(freq * (1 - freq), 1e-12) / trials)
            assert freq <= bound + slack


def test_bound_inputs_validation():
    with pytest.raises(ValueError):
        BoundInputs(n=0, p=3, d=1, log_shatter=0.0)
    with pytest.raises(ValueError):
        BoundInputs(n=5, p=3, d=4, log_shatter=0.0)
    with pytest.raises(ValueError):
        BoundInputs(n=5, p=3, d=1, log_shatter=-1.0)
    with pytest.raises(ValueError):
        BoundInputs(n=5, p=3, d=1, log_shatter=0.0, epsilon=0.0)
