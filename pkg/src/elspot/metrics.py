"""Interval and quantile forecast scores and their aggregation over horizons."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
import json

import numpy as np

from .errors import EmptyInput, InvalidInterval

COVERAGES = (0.50, 0.90, 0.98)
WINKLER_COVERAGES = (0.50, 0.90)


def winkler_penalty(c):
    """Penalty weight per unit of miss; 2 over the miscoverage 1 - c."""
    return 2.0 / (1.0 - c)


def unconditional_coverage(lower, upper, realized, c):
    """(rate, rate - c, |rate - c|) for intervals [lower, upper]."""
    lower, upper, realized = (np.atleast_1d(np.asarray(a, dtype=float))
                              for a in (lower, upper, realized))
    if realized.size == 0:
        raise EmptyInput("no forecast/realization pairs")
    hit = (realized >= lower) & (realized <= upper)
    rate = float(hit.mean())
    return rate, rate - c, abs(rate - c)


def winkler_score(lower, upper, realized, c):
    if not 0.0 < c < 1.0:
        raise ValueError(f"coverage must lie in (0, 1), got {c}")
    lower, upper, realized = np.broadcast_arrays(*(np.asarray(a, dtype=float)
                                                   for a in (lower, upper, realized)))
    if np.any(lower > upper):
        raise InvalidInterval("lower bound above upper bound")
    k = winkler_penalty(c)
    score = (upper - lower) + k * np.maximum(realized - upper, 0.0) \
        + k * np.maximum(lower - realized, 0.0)
    return float(score) if score.ndim == 0 else score


def pinball(q_forecast, realized, q):
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    diff = np.asarray(realized, dtype=float) - np.asarray(q_forecast, dtype=float)
    loss = np.where(diff < 0, (q - 1.0) * diff, q * diff)
    return float(loss) if loss.ndim == 0 else loss


def mean_pinball(quantiles, realized, levels=None):
    """Average pinball loss over a quantile grid (default 1%..99%)."""
    quantiles = np.asarray(quantiles, dtype=float)
    if levels is None:
        levels = np.arange(1, quantiles.shape[-1] + 1) / (quantiles.shape[-1] + 1)
    levels = np.asarray(levels, dtype=float)
    diff = np.asarray(realized, dtype=float)[..., None] - quantiles
    loss = np.where(diff < 0, (levels - 1.0) * diff, levels * diff)
    return loss.mean(axis=-1)


@dataclass
class HorizonScores:
    horizon: int
    count: int
    uc: dict  # c -> (rate, error, abs error)
    winkler: dict  # c -> mean score
    plf: float


def score_horizon(quantiles, realized, horizon=0) -> HorizonScores:
    """Scores for one horizon from an (n, 99) quantile array and n realizations."""
    q = np.atleast_2d(np.asarray(quantiles, dtype=float))
    y = np.atleast_1d(np.asarray(realized, dtype=float))
    if y.size == 0:
        raise EmptyInput("no forecast/realization pairs")
    if q.shape != (y.size, 99):
        raise ValueError(f"expected quantiles of shape ({y.size}, 99), got {q.shape}")
    uc, ws = {}, {}
    for c in COVERAGES:
        lo = int(round(50 * (1 - c)))
        lower, upper = q[:, lo - 1], q[:, 99 - lo]
        uc[c] = unconditional_coverage(lower, upper, y, c)
        if c in WINKLER_COVERAGES:
            ws[c] = float(np.mean(winkler_score(lower, upper, y, c)))
    return HorizonScores(horizon, int(y.size), uc, ws, float(np.mean(mean_pinball(q, y))))


def _summary(per_h):
    """Unweighted averages over horizons."""
    out = {}
    for c in COVERAGES:
        out[f"UC{int(c * 100)}"] = float(np.mean([s.uc[c][0] for s in per_h]))
        out[f"UC{int(c * 100)}_error"] = float(np.mean([s.uc[c][1] for s in per_h]))
        out[f"UC{int(c * 100)}_abs_error"] = float(np.mean([s.uc[c][2] for s in per_h]))
    for c in WINKLER_COVERAGES:
        out[f"WS{int(c * 100)}"] = float(np.mean([s.winkler[c] for s in per_h]))
    out["PLF"] = float(np.mean([s.plf for s in per_h]))
    return out


SUMMARY_ROWS = ("UC50", "UC50_error", "UC50_abs_error", "UC90", "UC90_error",
                "UC90_abs_error", "UC98", "UC98_error", "UC98_abs_error", "WS50", "WS90", "PLF")


@dataclass
class EvaluationReport:
    per_horizon: dict = field(default_factory=dict)  # variant -> [HorizonScores]
    summary: dict = field(default_factory=dict)  # variant -> {row: value}

    @property
    def variants(self):
        return list(self.summary)

    def to_json(self, path=None):
        doc = {"summary": self.summary,
               "per_horizon": {v: [{"horizon": s.horizon, "count": s.count,
                                    "uc": {str(c): list(s.uc[c]) for c in s.uc},
                                    "winkler": {str(c): s.winkler[c] for c in s.winkler},
                                    "plf": s.plf} for s in hs]
                               for v, hs in self.per_horizon.items()}}
        if path is None:
            return doc
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        return doc

    def to_csv(self, path):
        """Summary table: one row per score, one column per variant."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["metric"] + self.variants)
            for row in SUMMARY_ROWS:
                w.writerow([row] + [repr(self.summary[v][row]) for v in self.variants])

    def horizon_csv(self, path):
        """Per-horizon curves, long format, for plotting."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["variant", "horizon", "count", "UC50", "UC90", "UC98", "WS50", "WS90", "PLF"])
            for v, hs in self.per_horizon.items():
                for s in hs:
                    w.writerow([v, s.horizon, s.count] + [repr(s.uc[c][0]) for c in COVERAGES]
                               + [repr(s.winkler[c]) for c in WINKLER_COVERAGES] + [repr(s.plf)])


def aggregate_report(scored) -> EvaluationReport:
    """``scored`` maps variant -> iterable of (horizon, quantiles[99], realized)."""
    report = EvaluationReport()
    for variant, rows in scored.items():
        by_h = {}
        for h, q, y in rows:
            by_h.setdefault(int(h), ([], []))
            by_h[int(h)][0].append(q)
            by_h[int(h)][1].append(y)
        if not by_h:
            raise EmptyInput(f"no scored forecasts for variant {variant!r}")
        per_h = [score_horizon(np.array(qs), np.array(ys), h) for h, (qs, ys) in sorted(by_h.items())]
        report.per_horizon[variant] = per_h
        report.summary[variant] = _summary(per_h)
    if not report.summary:
        raise EmptyInput("nothing to aggregate")
    return report


def report_from_records(records_by_variant) -> EvaluationReport:
    """Convenience wrapper over backtest records or their JSON dicts."""
    scored = {}
    for v, recs in records_by_variant.items():
        rows = []
        for r in recs:
            if isinstance(r, dict):
                rows.append((r["horizon"], r["quantiles"], r["realized"]))
            else:
                rows.append((r.horizon, r.forecast.quantiles, r.realized))
        scored[v] = rows
    return aggregate_report(scored)
