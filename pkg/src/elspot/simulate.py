"""Paths of the two-factor model and synthetic price series with known parts."""
from __future__ import annotations

import csv
from dataclasses import dataclass
import datetime as dt

import numpy as np

from .fgn import sample_fgn_batch
from .fou import FouParams, simulate_fou
from .gev import GevParams
from .hawkes import HawkesParams, Jump2Params, intensity_trace, simulate_hawkes, simulate_x2
from .rng import make_rng
from .series import DEFAULT_CALENDAR, PriceSeries, labels_for

# Fixed parameter set of the reference simulations.
REFERENCE_FOU = FouParams(alpha1=0.1, sigma=6.0, hurst=0.5)
REFERENCE_JUMP = Jump2Params(alpha2=0.5, hawkes=HawkesParams(0.01, 0.0, 0.0),
                             mark_dist=GevParams(mu=18.0, sigma=2.0, xi=0.7))
HURST_GRID = (0.2, 0.3, 0.5, 0.7)
EXCITATION_GRID = ((0.0, 0.0), (0.05, 0.08), (0.15, 0.2), (0.3, 0.5))


@dataclass
class ModelPath:
    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    intensity: np.ndarray
    events: object

    @property
    def x(self):
        return self.x1 + self.x2

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x1", "x2", "x", "intensity"])
            for row in zip(self.t, self.x1, self.x2, self.x, self.intensity):
                w.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


def simulate_model(fou: FouParams, jump: Jump2Params, n_days, seed=None) -> ModelPath:
    """Daily samples t = 0..n_days-1 of X1, X2 and the Hawkes intensity."""
    rng = make_rng(seed)
    steps = n_days - 1
    if steps >= 1:
        g = sample_fgn_batch(fou.hurst, steps, 1, rng)[0]
        x1 = simulate_fou(fou, steps, 1.0, g)
    else:
        x1 = np.full(max(n_days, 0), fou.x0)
    events = simulate_hawkes(jump.hawkes, jump.mark_dist, float(n_days - 1), rng)
    x2 = simulate_x2(jump, events, n_days)
    grid = np.arange(n_days, dtype=float)
    # right limit at each grid point, so an event on day k shows its kick
    lam = intensity_trace(jump.hawkes, events, grid + 1e-12)
    return ModelPath(grid, x1, x2, lam, events)


@dataclass
class SyntheticSeries:
    series: PriceSeries
    f_s: np.ndarray
    trend: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    path: ModelPath


def weekly_offsets(amplitude=8.0):
    """Default weekday offsets (label 1..8, index 0 unused): weekend and holidays low."""
    base = np.array([0.0, 2.0, 3.0, 3.0, 2.5, 1.5, -4.0, -8.0, -9.0])
    return base * amplitude / 9.0


def synthetic_price_series(fou: FouParams, jump: Jump2Params, n_days, seed=None,
                           level=60.0, weekly=None, trend_amplitude=8.0,
                           trend_period=365.0, start=dt.date(2009, 1, 1),
                           calendar=DEFAULT_CALENDAR) -> SyntheticSeries:
    """Level + weekly dummies + slow sinusoidal trend + X1 + X2."""
    path = simulate_model(fou, jump, n_days, seed)
    labels = labels_for(start, n_days, calendar)
    offsets = weekly_offsets() if weekly is None else np.asarray(weekly, float)
    f_s = offsets[labels]
    t = np.arange(n_days)
    trend = level + trend_amplitude * np.sin(2 * np.pi * t / trend_period)
    y = trend + f_s + path.x1 + path.x2
    series = PriceSeries(start, y, labels, calendar)
    return SyntheticSeries(series, f_s, trend, path.x1, path.x2, path)
