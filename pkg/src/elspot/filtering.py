"""Split a daily price series into weekly, jump, long-term and base parts.

Pipeline order: weekly dummies, spike filtering, then the wavelet trend on the
spike-free series, so that spikes do not bend the long-term component.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .errors import DegenerateInput, InsufficientData
from .hawkes import EventStream, jump_path
from .series import PriceSeries, moving_average
from .wavelet import approximation

log = logging.getLogger(__name__)

N_LABELS = 8


def label_means(series: PriceSeries):
    """Per-label mean prices, indexed 1..8 (index 0 unused); empty labels get the overall mean."""
    y = series.values
    ybar = float(y.mean())
    means = np.full(N_LABELS + 1, ybar)
    missing = []
    for j in range(1, N_LABELS + 1):
        sel = series.labels == j
        if sel.any():
            means[j] = y[sel].mean()
        else:
            missing.append(j)
    if missing:
        log.debug("labels %s absent from window; using the overall mean", missing)
    return means, ybar, missing


def weekly_profile(series: PriceSeries):
    """Dummy function Y_D(t) and the overall mean."""
    means, ybar, _ = label_means(series)
    return means[series.labels], ybar


def deseasonalize_weekly(series: PriceSeries):
    y_d, ybar = weekly_profile(series)
    return series.values - (y_d - ybar)


def estimate_alpha2(y):
    """log of the largest one-step decay ratio y(j-1)/y(j).

    The series is first shifted so that its minimum is 1 when it is not
    already strictly positive.
    """
    y = np.asarray(y, dtype=float)
    lo = y.min()
    if lo <= 0:
        y = y - (lo - 1.0)
    return float(math.log(np.max(y[:-1] / y[1:])))


@dataclass
class SpikeDetection:
    alpha2_hat: float
    events: EventStream
    sigma_tilde: float
    increments: np.ndarray = field(repr=False, default=None)


def modified_increments(y_w, alpha2, ma_window=30):
    """Y_w(t) - Y~_w(t-1) for t = 1..N-1, with Y~_w blending toward the trailing mean."""
    y_w = np.asarray(y_w, dtype=float)
    y30 = moving_average(y_w, ma_window)
    blend = (1.0 - alpha2) * y_w + alpha2 * y30
    return y_w[1:] - blend[:-1]


def _events_from(inc, threshold, horizon, exclude=()):
    hits = np.flatnonzero(np.abs(inc) > threshold)
    hits = np.array([h for h in hits if h + 1 not in exclude], dtype=int)
    times = (hits + 1).astype(float)
    return EventStream(times, inc[hits], horizon)


def detect_spikes(y_w, threshold=2.5, ma_window=30):
    y_w = np.asarray(y_w, dtype=float)
    if y_w.size < 60:
        raise InsufficientData(f"spike detection needs >= 60 points, got {y_w.size}")
    a2 = estimate_alpha2(y_w)
    inc = modified_increments(y_w, a2, ma_window)
    s = float(np.std(inc))
    if s == 0.0:
        raise DegenerateInput("modified increments have zero spread")
    events = _events_from(inc, threshold * s, float(y_w.size - 1))
    return SpikeDetection(a2, events, s, inc)


def reconstruct_jump_series(jump_events: EventStream, alpha2, n_days):
    if len(jump_events) and not alpha2 > 0:
        raise ValueError(f"alpha2 must be > 0, got {alpha2}")
    return jump_path(jump_events.times, jump_events.marks, alpha2, n_days)


def wavelet_trend(y_s, level=8):
    return approximation(y_s, level=level, order=24)


def median_reversion(y_s, horizon, theta=0.985):
    """Prolongation m + (y(T) - m) * theta**j, j = 1..horizon, m the window median."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    y_s = np.asarray(y_s, dtype=float)
    m = float(np.median(y_s))
    j = np.arange(1, horizon + 1)
    return m + (y_s[-1] - m) * theta**j


def extend_trend(y_s, horizon, theta=0.985, level=8):
    """Wavelet trend of the series prolonged by ``horizon`` median-reverting days."""
    y_s = np.asarray(y_s, dtype=float)
    if y_s.size < 2**level:
        raise InsufficientData(f"need >= {2**level} points for level {level}, got {y_s.size}")
    ext = np.concatenate([y_s, median_reversion(y_s, horizon, theta)])
    return wavelet_trend(ext, level)


@dataclass(frozen=True)
class DecomposeConfig:
    level: int = 8
    theta: float = 0.985
    extension: int = 30
    threshold: float = 2.5
    ma_window: int = 30
    iterate_spikes: bool = False
    order: str = "jumps_first"  # "trend_first" exists for comparison only


@dataclass
class Decomposition:
    y: np.ndarray
    y_d: np.ndarray
    f_s: np.ndarray
    f_l: np.ndarray
    y_w: np.ndarray
    y_j: np.ndarray
    y_s: np.ndarray
    y_f: np.ndarray
    alpha2_hat: float
    jump_events: EventStream
    mean_price: float
    sigma_tilde: float
    f_l_ext: np.ndarray  # trend on the days after the window
    label_means: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return self.y.size

    def reconstruct(self):
        return self.y_f + self.f_l + self.y_j + self.f_s

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "y", "f_s", "f_l", "y_j", "y_f"])
            for t in range(self.y.size):
                w.writerow([t] + [repr(float(a[t])) for a in
                                  (self.y, self.f_s, self.f_l, self.y_j, self.y_f)])

    def summary(self):
        return {"alpha2_hat": self.alpha2_hat, "jump_count": len(self.jump_events),
                "sigma_tilde": self.sigma_tilde, "mean_price": self.mean_price}


def _spikes(y_w, cfg: DecomposeConfig):
    n = y_w.size
    try:
        det = detect_spikes(y_w, cfg.threshold, cfg.ma_window)
    except DegenerateInput:
        return estimate_alpha2(y_w), EventStream.empty(float(n - 1)), 0.0, np.zeros(n)
    events = det.events
    y_j = reconstruct_jump_series(events, det.alpha2_hat, n)
    if cfg.iterate_spikes and det.alpha2_hat > 0:
        while True:
            inc = modified_increments(y_w - y_j, det.alpha2_hat, cfg.ma_window)
            new = _events_from(inc, cfg.threshold * det.sigma_tilde, float(n - 1),
                               exclude=set(events.times.astype(int)))
            if not len(new):
                break
            order = np.argsort(np.concatenate([events.times, new.times]))
            events = EventStream(np.concatenate([events.times, new.times])[order],
                                 np.concatenate([events.marks, new.marks])[order], float(n - 1))
            y_j = reconstruct_jump_series(events, det.alpha2_hat, n)
    return det.alpha2_hat, events, det.sigma_tilde, y_j


def decompose(series: PriceSeries, config: DecomposeConfig = DecomposeConfig()) -> Decomposition:
    n = len(series)
    if n < 2**config.level:
        raise InsufficientData(f"decomposition needs >= {2**config.level} points, got {n}")
    means, ybar, missing = label_means(series)
    y = series.values
    y_d = means[series.labels]
    f_s = y_d - ybar
    y_w = y - f_s
    if config.order == "trend_first":
        trend = extend_trend(y_w, config.extension, config.theta, config.level)
        a2, events, s_tilde, y_j = _spikes(y_w - trend[:n], config)
    elif config.order == "jumps_first":
        a2, events, s_tilde, y_j = _spikes(y_w, config)
        trend = extend_trend(y_w - y_j, config.extension, config.theta, config.level)
    else:
        raise ValueError(f"unknown order {config.order!r}")
    y_s = y_w - y_j
    f_l = trend[:n]
    y_f = y_s - f_l
    return Decomposition(
        y=y.copy(), y_d=y_d, f_s=f_s, f_l=f_l, y_w=y_w, y_j=y_j, y_s=y_s, y_f=y_f,
        alpha2_hat=a2, jump_events=events, mean_price=ybar, sigma_tilde=s_tilde,
        f_l_ext=trend[n:], label_means=means,
        diagnostics={"missing_labels": missing},
    )
