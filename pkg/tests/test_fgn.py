import numpy as np
import pytest

from elspot.errors import EmptyInput, InvalidHurst
from elspot.fgn import (FgnSpec, circulant_eigenvalues, fbm_from_fgn, fgn_autocovariance,
                        sample_fgn, sample_fgn_batch)


def test_autocovariance_examples():
    assert fgn_autocovariance(0.5, 1) == pytest.approx(0.0, abs=1e-15)
    for H in (0.1, 0.5, 0.9):
        assert fgn_autocovariance(H, 0) == pytest.approx(1.0)
    assert fgn_autocovariance(0.7, 1) == pytest.approx(0.5 * (2**1.4 - 2), rel=1e-12)
    assert fgn_autocovariance(0.7, 1) == pytest.approx(0.31951, abs=1e-5)


@pytest.mark.parametrize("H", [0.0, 1.0, -0.1, 1.5])
def test_invalid_hurst(H):
    with pytest.raises(InvalidHurst):
        fgn_autocovariance(H, 1)
    with pytest.raises(InvalidHurst):
        FgnSpec(H, 10)


@pytest.mark.parametrize("H", [0.05, 0.2, 0.5, 0.7, 0.95])
def test_embedding_nonnegative(H):
    assert circulant_eigenvalues(H, 1000).min() >= 0.0


def test_brownian_case_is_white():
    x = sample_fgn_batch(0.5, 4, 20000, np.random.default_rng(1))
    c = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
    assert abs(c) < 0.03
    assert np.var(x) == pytest.approx(1.0, abs=0.03)


def test_lag1_correlation_h07():
    rng = np.random.default_rng(2)
    x = sample_fgn_batch(0.7, 1024, 200, rng)
    xc = x - x.mean(axis=1, keepdims=True)
    r1 = np.mean(np.sum(xc[:, 1:] * xc[:, :-1], axis=1) / np.sum(xc**2, axis=1))
    assert abs(r1 - 0.31951) < 0.03


def test_negative_correlation_h02():
    x = sample_fgn_batch(0.2, 1024, 50, np.random.default_rng(3))
    r1 = np.mean(x[:, 1:] * x[:, :-1])
    assert r1 < 0


def test_deterministic_given_seed():
    a = sample_fgn(FgnSpec(0.3, 100, seed=9))
    b = sample_fgn(FgnSpec(0.3, 100, seed=9))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (100,)


def test_odd_batch_sizes():
    for size in (1, 2, 3, 7):
        assert sample_fgn_batch(0.4, 33, size, np.random.default_rng(0)).shape == (size, 33)
    assert sample_fgn_batch(0.4, 1, 5, np.random.default_rng(0)).shape == (5, 1)


def test_fbm_from_fgn():
    np.testing.assert_array_equal(fbm_from_fgn([1, 1, 1]), [1, 2, 3])
    np.testing.assert_array_equal(fbm_from_fgn([2, -2]), [2, 0])
    with pytest.raises(EmptyInput):
        fbm_from_fgn([])


def test_fbm_variance_scaling():
    """Var B(n) = n^{2H}."""
    H, n = 0.3, 64
    paths = np.cumsum(sample_fgn_batch(H, n, 20000, np.random.default_rng(4)), axis=1)
    assert np.var(paths[:, -1]) == pytest.approx(n ** (2 * H), rel=0.05)
