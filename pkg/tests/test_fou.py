import math

import numpy as np
import pytest
from scipy import stats

from elspot.errors import InvalidTime, UnstableStep
from elspot.fgn import sample_fgn_batch
from elspot.fou import FouParams, fou_stationary_variance, fou_variance, simulate_fou


def test_deterministic_decay():
    p = FouParams(0.1, 0.0, 0.5, x0=1.0)
    x = simulate_fou(p, 1, 1.0, [0.0])
    assert x.tolist() == pytest.approx([1.0, 0.9])
    x = simulate_fou(p, 1, 1.0, [0.0], exact_drift=True)
    assert x[1] == pytest.approx(math.exp(-0.1))


def test_zero_path():
    p = FouParams(0.1, 0.0, 0.3)
    np.testing.assert_array_equal(simulate_fou(p, 50, 1.0, np.ones(50)), np.zeros(51))


def test_unstable_step():
    with pytest.raises(UnstableStep):
        simulate_fou(FouParams(1.0, 1.0, 0.5), 2, 1.0, np.zeros(2))
    # the exponential integrator has no step restriction
    simulate_fou(FouParams(1.0, 1.0, 0.5), 2, 1.0, np.zeros(2), exact_drift=True)


def test_length_checked():
    with pytest.raises(ValueError):
        simulate_fou(FouParams(0.1, 1.0, 0.5), 10, 1.0, np.zeros(9))


def test_brownian_stationary_variance():
    p = FouParams(0.1, 6.0, 0.5)
    g = sample_fgn_batch(0.5, 5000, 1, np.random.default_rng(5))[0]
    x = simulate_fou(p, 5000, 1.0, g)
    # Euler with dt=1 has variance sigma^2 / (1 - (1-a)^2) = 189.5, within 10% of 180
    assert np.var(x[500:]) == pytest.approx(180.0, rel=0.10)


def test_stationary_variance_examples():
    assert fou_stationary_variance(FouParams(0.1, 6.0, 0.5)) == pytest.approx(180.0)
    assert fou_stationary_variance(FouParams(1.0, math.sqrt(2), 0.5)) == pytest.approx(1.0)
    v = fou_stationary_variance(FouParams(0.1, 6.0, 0.7))
    assert v == pytest.approx(0.1**-1.4 * 0.7 * 36 * math.gamma(1.4), rel=1e-12)
    assert v == pytest.approx(561.2, rel=1e-3)


def test_quadrature_variance():
    assert fou_variance(FouParams(0.1, 6.0, 0.5), 0.0) == 0.0
    with pytest.raises(InvalidTime):
        fou_variance(FouParams(0.1, 6.0, 0.5), -1.0)
    # Brownian case in closed form: sigma^2 (1 - e^{-2at}) / (2a)
    p = FouParams(0.1, 6.0, 0.5)
    for t in (0.5, 3.0, 20.0):
        assert fou_variance(p, t) == pytest.approx(180 * (1 - math.exp(-0.2 * t)), rel=1e-9)
    assert fou_variance(p, 500.0) == pytest.approx(180.0, rel=1e-9)
    for H in (0.2, 0.7):
        q = FouParams(0.1, 6.0, H)
        assert fou_variance(q, 800.0) == pytest.approx(fou_stationary_variance(q), rel=1e-6)


@pytest.mark.parametrize("H", [0.5, 0.6, 0.7, 0.9])
def test_variance_monotone_and_bounded(H):
    p = FouParams(0.1, 6.0, H)
    ts = np.linspace(0, 150, 76)
    v = np.array([fou_variance(p, t) for t in ts])
    assert np.all(np.diff(v) >= -1e-9 * v.max())
    assert v.max() <= fou_stationary_variance(p) * (1 + 1e-9)


def test_marginal_gaussian_and_mean_decay():
    p = FouParams(0.1, 6.0, 0.3, x0=20.0)
    g = sample_fgn_batch(0.3, 30, 10000, np.random.default_rng(6))
    x = simulate_fou(p, 30, 1.0, g, exact_drift=True)
    end = x[:, -1]
    assert abs(stats.skew(end)) < 0.1
    assert abs(stats.kurtosis(end)) < 0.2
    se = end.std() / math.sqrt(end.size)
    assert abs(end.mean() - 20.0 * math.exp(-3.0)) < 3 * se


def test_simulated_variance_matches_quadrature():
    """Small steps make Euler converge to the continuous-time variance."""
    p = FouParams(0.1, 6.0, 0.7)
    dt, T = 0.125, 16.0
    n = int(T / dt)
    g = sample_fgn_batch(0.7, n, 8000, np.random.default_rng(7))
    x = simulate_fou(p, T, dt, g)
    assert np.var(x[:, -1]) == pytest.approx(fou_variance(p, T), rel=0.06)


def test_rough_case_overshoots_stationary_level():
    """For H < 1/2 the variance from a fixed start peaks above its limit; simulation agrees."""
    p = FouParams(0.1, 6.0, 0.2)
    peak = fou_variance(p, 6.0)
    assert peak > 1.1 * fou_stationary_variance(p)
    dt = 1 / 32
    g = sample_fgn_batch(0.2, int(6 / dt), 4000, np.random.default_rng(8))
    x = simulate_fou(p, 6.0, dt, g, exact_drift=True)
    assert np.var(x[:, -1]) == pytest.approx(peak, rel=0.08)
    assert np.var(x[:, -1]) > fou_stationary_variance(p)
