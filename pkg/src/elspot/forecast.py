"""Rolling-window calibration and Monte-Carlo interval forecasts."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import logging

import numpy as np

from .errors import ElspotError, FitError, InsufficientData
from .fgn import sample_fgn_batch
from .filtering import DecomposeConfig, Decomposition, decompose, label_means
from .fou import FouParams, simulate_fou
from .fracest import estimate_all
from .gev import GevParams, gev_fit_mle
from .hawkes import EventStream, HawkesParams, Jump2Params, hawkes_fit, simulate_x2_batch
from .rng import child_rng, make_rng
from .series import PriceSeries
from .simulate import REFERENCE_FOU, REFERENCE_JUMP

log = logging.getLogger(__name__)

VARIANTS = ("fbm", "sbm", "naive")
QUANTILE_LEVELS = np.arange(1, 100) / 100.0
COVERAGES = (0.50, 0.90, 0.98)
MAX_HORIZON = 30


@dataclass(frozen=True)
class ModelParams:
    fou: FouParams
    jump: Jump2Params
    window_id: int = 0
    flags: tuple = ()


@dataclass
class ForecastDistribution:
    origin: int
    horizon: int
    quantiles: np.ndarray  # prices at levels 1%..99%
    n_paths: int
    origin_date: object = None

    def quantile(self, q):
        """Price at level ``q`` in (0, 1); q must be a whole percent."""
        k = int(round(q * 100))
        if not 1 <= k <= 99 or abs(q * 100 - k) > 1e-9:
            raise ValueError(f"quantile level {q} not on the 1%..99% grid")
        return float(self.quantiles[k - 1])

    def interval(self, coverage):
        tail = (1.0 - coverage) / 2.0
        return self.quantile(tail), self.quantile(1.0 - tail)

    @property
    def intervals(self):
        return {c: self.interval(c) for c in COVERAGES}


def _empirical(samples, origin, h, origin_date=None):
    q = np.quantile(samples, QUANTILE_LEVELS)
    q = np.maximum.accumulate(q)  # guard against rounding
    return ForecastDistribution(origin, h, q, int(samples.size), origin_date)


# ---------------------------------------------------------------------------
# calibration

@dataclass
class RawCalibration:
    """Per-window estimates; ``None`` marks a failed stage."""
    fou: FouParams | None
    hawkes: HawkesParams | None
    gev: GevParams | None
    alpha2: float | None
    flags: list = field(default_factory=list)
    hurst_clamped: bool = False


def _positive_spikes(events: EventStream):
    return events.select(events.marks > 0)


def calibrate_raw(decomp: Decomposition, variant="fbm", pin_hurst=None) -> RawCalibration:
    flags = []
    hurst = 0.5 if variant == "sbm" else pin_hurst
    fou = None
    clamped = False
    try:
        est = estimate_all(decomp.y_f, hurst=hurst)
        clamped = bool(est.diagnostics.get("clamped", False))
        if not (np.isfinite(est.alpha1_hat) and est.alpha1_hat > 0 and est.sigma_hat > 0):
            raise FitError(f"fOU estimates out of range: {est}")
        fou = FouParams(est.alpha1_hat, est.sigma_hat, est.hurst_hat, float(decomp.y_f[-1]))
    except (ElspotError, ValueError, OverflowError) as exc:
        flags.append(f"fou_fallback: {exc}")

    spikes = _positive_spikes(decomp.jump_events)
    hawkes = None
    if len(spikes) >= 3:
        try:
            hawkes = hawkes_fit(spikes).params
        except FitError as exc:
            hawkes = exc.best
            flags.append("hawkes_nonconverged")
        if hawkes is not None and not hawkes.stationary:
            hawkes = None
    if hawkes is None:
        flags.append(f"hawkes_fallback: {len(spikes)} spikes")

    gev = None
    if len(spikes) >= 5:
        try:
            gev = gev_fit_mle(spikes.marks)
        except FitError as exc:
            gev = exc.best
            flags.append("gev_nonconverged")
    if gev is None:
        flags.append(f"gev_fallback: {len(spikes)} marks")

    a2 = decomp.alpha2_hat
    if not (np.isfinite(a2) and a2 > 0):
        flags.append(f"alpha2_fallback: {a2}")
        a2 = None
    return RawCalibration(fou, hawkes, gev, a2, flags, clamped)


def resolve(raw: RawCalibration, previous: ModelParams | None = None, window_id=0,
            x0=0.0) -> ModelParams:
    """Fill failed stages from the previous window, else from the reference set."""
    prev_fou = previous.fou if previous is not None else REFERENCE_FOU
    prev_jump = previous.jump if previous is not None else REFERENCE_JUMP
    fou = raw.fou if raw.fou is not None else replace(prev_fou, x0=x0)
    jump = Jump2Params(
        raw.alpha2 if raw.alpha2 is not None else prev_jump.alpha2,
        raw.hawkes if raw.hawkes is not None else prev_jump.hawkes,
        raw.gev if raw.gev is not None else prev_jump.mark_dist,
    )
    return ModelParams(fou, jump, window_id, tuple(raw.flags))


def calibrate_window(decomp: Decomposition, variant="fbm", previous=None, window_id=0,
                     pin_hurst=None) -> ModelParams:
    raw = calibrate_raw(decomp, variant, pin_hurst)
    for f in raw.flags:
        log.info("window %s: %s", window_id, f)
    return resolve(raw, previous, window_id, float(decomp.y_f[-1]))


# ---------------------------------------------------------------------------
# forecasting

def simulate_terminal(params: ModelParams, decomp: Decomposition, h, n_paths, seed):
    """Monte-Carlo draws of X1(T+h) + X2(T+h)."""
    rng = make_rng(seed)
    fou = replace(params.fou, x0=float(decomp.y_f[-1]))
    g = sample_fgn_batch(fou.hurst, h, n_paths, rng)
    x1 = simulate_fou(fou, h, 1.0, g, exact_drift=True)[:, -1]
    # carry the decomposed jump state forward; past spikes feed the intensity
    T = len(decomp) - 1
    history = _positive_spikes(decomp.jump_events).times - T
    x2 = simulate_x2_batch(params.jump, float(h), n_paths, rng, history=history,
                           x0=float(decomp.y_j[-1]))
    return x1 + x2


def forecast_distribution(params: ModelParams, decomp: Decomposition, h, n_paths=1000,
                          seed=0, target_label=None, origin=0) -> ForecastDistribution:
    if not 1 <= h <= MAX_HORIZON:
        raise ValueError(f"horizon must lie in 1..{MAX_HORIZON}, got {h}")
    if h > decomp.f_l_ext.size:
        raise ValueError(f"trend extension covers {decomp.f_l_ext.size} days, need {h}")
    f_s = 0.0
    if target_label is not None:
        f_s = decomp.label_means[target_label] - decomp.mean_price
    base = f_s + decomp.f_l_ext[h - 1]
    samples = base + simulate_terminal(params, decomp, h, n_paths, seed)
    return _empirical(samples, origin, h)


def naive_forecast(window: PriceSeries, h, n_paths=1000, seed=0, origin=0):
    """Dummy level of the target day plus a bootstrapped in-window residual."""
    rng = make_rng(seed)
    means, _, _ = label_means(window)
    resid = window.values - means[window.labels]
    target = window.future_labels(h)[-1]
    draws = means[target] + rng.choice(resid, size=n_paths, replace=True)
    return _empirical(draws, origin, h)


# ---------------------------------------------------------------------------
# backtest

@dataclass(frozen=True)
class BacktestConfig:
    window_length: int = 730
    horizons: tuple = tuple(range(1, MAX_HORIZON + 1))
    n_paths: int = 1000
    variant: str = "fbm"
    seed: int = 0
    pin_hurst: float | None = None
    decompose: DecomposeConfig = DecomposeConfig()
    threads: int = 1

    def __post_init__(self):
        if self.window_length < 256:
            raise ValueError("window_length must be >= 256")
        if not self.horizons or min(self.horizons) < 1 or max(self.horizons) > MAX_HORIZON:
            raise ValueError(f"horizons must be a nonempty subset of 1..{MAX_HORIZON}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")


@dataclass
class ForecastRecord:
    origin: int
    horizon: int
    variant: str
    forecast: ForecastDistribution
    realized: float
    flags: tuple = ()
    params: ModelParams | None = None

    def to_json(self):
        return {"origin": self.origin,
                "origin_date": str(self.forecast.origin_date) if self.forecast.origin_date else None,
                "horizon": self.horizon, "variant": self.variant,
                "quantiles": [float(q) for q in self.forecast.quantiles],
                "realized": self.realized, "flags": list(self.flags)}


def forecast_origins(n, window_length, h):
    """Last in-window indices o with target o + h <= n - 1, stepping by h."""
    first = window_length - 1
    return list(range(first, n - h, h))


def _origin_task(args):
    series, origin, cfg, horizons = args
    win = series.window(origin - cfg.window_length + 1, origin + 1)
    if cfg.variant == "naive":
        return origin, None, None, [
            (h, naive_forecast(win, h, cfg.n_paths, child_rng(cfg.seed, origin, h), origin))
            for h in horizons]
    ext_cfg = replace(cfg.decompose, extension=max(cfg.decompose.extension, max(horizons)))
    decomp = decompose(win, ext_cfg)
    raw = calibrate_raw(decomp, cfg.variant, cfg.pin_hurst)
    return origin, decomp, raw, None


def rolling_backtest(series: PriceSeries, config: BacktestConfig):
    n = len(series)
    if n < config.window_length + max(config.horizons):
        raise InsufficientData(
            f"need >= {config.window_length + max(config.horizons)} days, got {n}")
    plan = {h: forecast_origins(n, config.window_length, h) for h in config.horizons}
    by_origin = {}
    for h, origins in plan.items():
        for o in origins:
            by_origin.setdefault(o, []).append(h)
    tasks = [(series, o, config, tuple(sorted(hs))) for o, hs in sorted(by_origin.items())]
    if config.threads > 1:
        with ProcessPoolExecutor(config.threads) as pool:
            done = list(pool.map(_worker, tasks, chunksize=4))
    else:
        done = [_worker(t) for t in tasks]

    records = []
    previous = None
    for (origin, result), (_, _, _, hs) in zip(done, tasks):
        date = series.date_at(origin)
        if config.variant == "naive":
            for h, fc in result:
                fc.origin_date = date
                records.append(ForecastRecord(origin, h, "naive", fc,
                                              float(series.values[origin + h])))
            continue
        decomp, raw = result
        params = resolve(raw, previous, origin, float(decomp.y_f[-1]))
        previous = params
        for f in raw.flags:
            log.info("origin %s: %s", origin, f)
        labels = series.labels
        for h in hs:
            fc = forecast_distribution(params, decomp, h, config.n_paths,
                                       child_rng(config.seed, origin, h),
                                       target_label=int(labels[origin + h]), origin=origin)
            fc.origin_date = date
            records.append(ForecastRecord(origin, h, config.variant, fc,
                                          float(series.values[origin + h]), params.flags,
                                          params))
    records.sort(key=lambda r: (r.horizon, r.origin))
    return records


def _worker(task):
    origin, decomp, raw, naive = _origin_task(task)
    if naive is not None:
        return origin, naive
    return origin, (decomp, raw)


def calibration_history(records):
    """One row per calibrated origin, in origin order."""
    seen = {}
    for r in records:
        if r.params is not None:
            seen.setdefault(r.origin, r)
    rows = []
    for origin, r in sorted(seen.items()):
        p = r.params
        hp, g = p.jump.hawkes, p.jump.mark_dist
        rows.append({"origin": origin, "date": str(r.forecast.origin_date),
                     "hurst": p.fou.hurst, "sigma": p.fou.sigma, "alpha1": p.fou.alpha1,
                     "alpha2": p.jump.alpha2, "lambda": hp.lambda0, "gamma": hp.gamma,
                     "beta": hp.beta, "gev_mu": g.mu, "gev_sigma": g.sigma, "gev_xi": g.xi,
                     "flags": ";".join(p.flags)})
    return rows


def branching_histogram(rows, bins=20):
    """Histogram of gamma/beta over calibrated windows with self-excitation."""
    ratios = np.array([r["gamma"] / r["beta"] for r in rows if r["beta"] > 0])
    counts, edges = np.histogram(ratios, bins=bins, range=(0.0, 1.0))
    return counts, edges
