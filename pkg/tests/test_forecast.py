import dataclasses
import datetime as dt
import math

import numpy as np
import pytest

from elspot.errors import InsufficientData
from elspot.filtering import decompose, label_means
from elspot.forecast import (BacktestConfig, ModelParams, branching_histogram, calibrate_raw,
                             calibrate_window, calibration_history, forecast_distribution,
                             forecast_origins, naive_forecast, resolve, rolling_backtest)
from elspot.fou import FouParams
from elspot.gev import GevParams
from elspot.hawkes import EventStream, HawkesParams, Jump2Params
from elspot.series import PriceSeries
from elspot.simulate import REFERENCE_FOU, REFERENCE_JUMP, synthetic_price_series


@pytest.fixture(scope="module")
def decomp(synthetic_730):
    return decompose(synthetic_730.series)


def test_deterministic_limit(decomp):
    d = dataclasses.replace(decomp, y_j=np.zeros_like(decomp.y_j))
    params = ModelParams(FouParams(0.1, 0.0, 0.5),
                         Jump2Params(0.5, HawkesParams(1e-12), GevParams(18, 2, 0.7)))
    fc = forecast_distribution(params, d, 1, n_paths=200, seed=1, target_label=3)
    expect = (d.label_means[3] - d.mean_price) + d.f_l_ext[0] + d.y_f[-1] * math.exp(-0.1)
    np.testing.assert_allclose(fc.quantiles, expect, rtol=1e-12)
    assert fc.n_paths == 200


def test_quantiles_and_intervals(decomp):
    params = calibrate_window(decomp)
    for h in (1, 5, 30):
        fc = forecast_distribution(params, decomp, h, n_paths=500, seed=h, target_label=1)
        assert fc.quantiles.shape == (99,)
        assert np.all(np.diff(fc.quantiles) >= 0)
        assert fc.interval(0.9) == (fc.quantile(0.05), fc.quantile(0.95))
        assert fc.intervals[0.5] == (fc.quantiles[24], fc.quantiles[74])
        assert fc.intervals[0.98] == (fc.quantiles[0], fc.quantiles[98])
    with pytest.raises(ValueError):
        forecast_distribution(params, decomp, 31)
    with pytest.raises(ValueError):
        forecast_distribution(params, decomp, 0)


def test_forecast_reproducible(decomp):
    params = calibrate_window(decomp)
    a = forecast_distribution(params, decomp, 7, n_paths=300, seed=5)
    b = forecast_distribution(params, decomp, 7, n_paths=300, seed=5)
    np.testing.assert_array_equal(a.quantiles, b.quantiles)


def test_calibration_variants(decomp):
    p = calibrate_window(decomp, variant="sbm")
    assert p.fou.hurst == 0.5
    q = calibrate_window(decomp, variant="fbm", pin_hurst=0.5)
    assert q == dataclasses.replace(p, flags=q.flags)
    r = calibrate_window(decomp, variant="fbm")
    assert 0 < r.fou.hurst < 1 and r.fou.sigma > 0 and r.fou.alpha1 > 0


def test_zero_spike_fallback(decomp):
    d = dataclasses.replace(decomp, jump_events=EventStream.empty(729.0))
    raw = calibrate_raw(d)
    assert raw.fou is not None
    assert raw.hawkes is None and raw.gev is None
    assert any(f.startswith("hawkes_fallback") for f in raw.flags)
    p = resolve(raw)
    assert p.jump.hawkes == REFERENCE_JUMP.hawkes
    assert p.jump.mark_dist == REFERENCE_JUMP.mark_dist
    prev = ModelParams(REFERENCE_FOU, Jump2Params(0.4, HawkesParams(0.02, 0.01, 0.1),
                                                  GevParams(10, 1, 0.2)))
    p = resolve(raw, prev)
    assert p.jump.hawkes == prev.jump.hawkes and p.jump.mark_dist == prev.jump.mark_dist


def _window(values, start=dt.date(2011, 3, 7)):
    return PriceSeries(start, np.asarray(values, dtype=float))


def test_naive_point_mass():
    start = dt.date(2011, 3, 7)
    labels = _window(np.zeros(730), start).labels
    w = _window(40.0 + 3.0 * labels, start)
    means, _, _ = label_means(w)
    for h in (1, 3):
        fc = naive_forecast(w, h, n_paths=400, seed=1)
        target = w.future_labels(h)[-1]
        np.testing.assert_allclose(fc.quantiles, means[target], atol=1e-9)


def test_naive_bootstrap(rng):
    w = _window(50 + rng.normal(0, 5, 730))
    means, _, _ = label_means(w)
    resid = w.values - means[w.labels]
    fc = naive_forecast(w, 2, n_paths=20000, seed=2)
    target = w.future_labels(2)[-1]
    assert fc.quantile(0.5) == pytest.approx(means[target], abs=0.25)
    lo, hi = fc.interval(0.9)
    assert lo == pytest.approx(means[target] + np.quantile(resid, 0.05), abs=0.4)
    assert hi == pytest.approx(means[target] + np.quantile(resid, 0.95), abs=0.4)


def test_origin_counting():
    assert forecast_origins(760, 730, 30) == [729]
    assert forecast_origins(790, 730, 30) == [729, 759]
    for n in (760, 761, 800, 1000):
        for h in (1, 2, 7, 13, 30):
            assert len(forecast_origins(n, 730, h)) == (n - 730) // h


def _small_series(n, seed=3):
    return synthetic_price_series(FouParams(0.1, 6.0, 0.4), REFERENCE_JUMP, n, seed=seed).series


def test_backtest_counts_and_realized():
    s = _small_series(790)
    recs = rolling_backtest(s, BacktestConfig(horizons=(30,), n_paths=50, variant="fbm"))
    assert [(r.origin, r.horizon) for r in recs] == [(729, 30), (759, 30)]
    assert recs[1].realized == s.values[789]
    s = _small_series(760)
    assert len(rolling_backtest(s, BacktestConfig(horizons=(30,), n_paths=50))) == 1
    with pytest.raises(InsufficientData):
        rolling_backtest(_small_series(759), BacktestConfig(horizons=(30,), n_paths=50))


def test_backtest_counts_per_horizon():
    s = _small_series(800)
    cfg = BacktestConfig(horizons=(1, 7, 30), n_paths=20, variant="naive")
    recs = rolling_backtest(s, cfg)
    for h in (1, 7, 30):
        assert sum(r.horizon == h for r in recs) == (800 - 730) // h


def test_backtest_deterministic_and_parallel():
    s = _small_series(770)
    cfg = BacktestConfig(horizons=(5, 20), n_paths=100, seed=9)
    a = rolling_backtest(s, cfg)
    b = rolling_backtest(s, cfg)
    c = rolling_backtest(s, dataclasses.replace(cfg, threads=2))
    for x, y, z in zip(a, b, c):
        assert (x.origin, x.horizon) == (y.origin, y.horizon) == (z.origin, z.horizon)
        np.testing.assert_array_equal(x.forecast.quantiles, y.forecast.quantiles)
        np.testing.assert_array_equal(x.forecast.quantiles, z.forecast.quantiles)
    d = rolling_backtest(s, dataclasses.replace(cfg, seed=10))
    assert not np.array_equal(a[0].forecast.quantiles, d[0].forecast.quantiles)


def test_variant_nesting():
    s = _small_series(770)
    base = BacktestConfig(horizons=(1, 10), n_paths=200, seed=4)
    fbm = rolling_backtest(s, dataclasses.replace(base, variant="fbm", pin_hurst=0.5))
    sbm = rolling_backtest(s, dataclasses.replace(base, variant="sbm"))
    assert len(fbm) == len(sbm)
    for x, y in zip(fbm, sbm):
        np.testing.assert_array_equal(x.forecast.quantiles, y.forecast.quantiles)


def test_calibration_history_rows():
    s = _small_series(790)
    recs = rolling_backtest(s, BacktestConfig(horizons=(1, 30), n_paths=20))
    rows = calibration_history(recs)
    assert [r["origin"] for r in rows] == sorted({r.origin for r in recs})
    counts, edges = branching_histogram(rows)
    assert counts.sum() == sum(r["beta"] > 0 for r in rows)
    js = recs[0].to_json()
    assert set(js) >= {"origin", "horizon", "variant", "quantiles", "realized"}
    assert len(js["quantiles"]) == 99


def test_config_validation():
    with pytest.raises(ValueError):
        BacktestConfig(window_length=100)
    with pytest.raises(ValueError):
        BacktestConfig(horizons=(0, 5))
    with pytest.raises(ValueError):
        BacktestConfig(horizons=(31,))
    with pytest.raises(ValueError):
        BacktestConfig(variant="garch")


def test_self_consistency_h10():
    """Series drawn from the model itself: 90% intervals over 300 origins cover ~90%."""
    s = synthetic_price_series(FouParams(0.1, 6.0, 0.5), REFERENCE_JUMP, 730 + 3000,
                               seed=21).series
    recs = rolling_backtest(s, BacktestConfig(horizons=(10,), n_paths=500, seed=2))
    assert len(recs) == 300
    inside = [r.forecast.interval(0.9)[0] <= r.realized <= r.forecast.interval(0.9)[1]
              for r in recs]
    assert abs(np.mean(inside) - 0.9) <= 0.05
